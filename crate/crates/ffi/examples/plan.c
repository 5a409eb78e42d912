/* Build: cc -I crates/ffi/include crates/ffi/examples/plan.c -L target/release -lrabi_ffi */
#include <stdio.h>
#include "rabi.h"

static int fail(RabiStatus status) {
    const char *msg = rabi_last_error_message();
    fprintf(stderr, "rabi error %d: %s\n", (int)status, msg ? msg : "");
    return 1;
}

int main(int argc, char **argv) {
    const char *name = argc > 1 ? argv[1] : "si_v_plan";
    RabiConfig *cfg = NULL;
    RabiOutput *out = NULL;
    RabiStatus status = rabi_config_from_preset(name, false, &cfg);
    if (status != RABI_STATUS_OK) return fail(status);
    status = rabi_run(cfg, &out);
    if (status != RABI_STATUS_OK) {
        rabi_config_free(cfg);
        return fail(status);
    }

    size_t tables = 0;
    rabi_output_table_count(out, &tables);
    for (size_t t = 0; t < tables; t++) {
        char *file = NULL;
        size_t rows = 0, cols = 0;
        rabi_output_table_name(out, t, &file);
        rabi_output_table_rows(out, t, &rows);
        rabi_output_column_count(out, t, &cols);
        printf("%s: %zu rows x %zu columns\n", file, rows, cols);
        rabi_string_free(file);
    }
    bool flagged = false;
    rabi_output_flagged(out, &flagged);
    printf("flagged: %s\n", flagged ? "yes" : "no");

    rabi_output_free(out);
    rabi_config_free(cfg);
    return 0;
}
