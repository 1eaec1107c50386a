#include <stdio.h>

#include "gbt.h"

int main(void) {
    const double amps[] = {0.6, 0.0, 0.8, 0.0};
    GbtConfig *cfg = NULL;
    GbtReport *report = NULL;
    char *json = NULL;
    double fidelity = 0.0;
    size_t message = 0;

    if (gbt_config_standard(2, amps, 2, 1, &cfg) != GBT_STATUS_OK) {
        fprintf(stderr, "config: %s\n", gbt_last_error());
        return 1;
    }
    if (gbt_teleport(cfg, &report) != GBT_STATUS_OK) {
        fprintf(stderr, "teleport: %s\n", gbt_last_error());
        gbt_config_free(cfg);
        return 1;
    }
    gbt_report_fidelity(report, &fidelity);
    gbt_report_message(report, &message);
    gbt_report_to_json(report, &json);
    printf("message %zu, fidelity %.12f\n%s\n", message, fidelity, json);

    gbt_string_free(json);
    gbt_report_free(report);
    gbt_config_free(cfg);
    return fidelity > 1.0 - 1e-9 ? 0 : 1;
}
