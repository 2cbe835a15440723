/* Copyright 2026 TFGKP Contributors */
/* SPDX-License-Identifier: Apache-2.0 */

#include <stdio.h>

#include "tfgkp.h"

int main(void) {
    TfgkpRequirements req;
    if (tfgkp_requirements(4.3, 0.01, 2, TFGKP_CONVENTION_NORMAL_CDF, &req) != TFGKP_STATUS_OK) {
        char msg[256];
        tfgkp_last_error(msg, sizeof msg);
        fprintf(stderr, "error: %s\n", msg);
        return 1;
    }
    printf("dt_c,min = %.3f ps, omega_r,max = %.3f GHz\n", req.dt_c_min_ps, req.omega_r_max_ghz);

    TfgkpReport *report = NULL;
    if (tfgkp_circuit_run("type_i", 1.0, true, &report) != TFGKP_STATUS_OK) {
        return 1;
    }
    printf("type_i success = %g, passed = %d\n", tfgkp_report_success_prob(report), tfgkp_report_passed(report));
    char *json = tfgkp_report_json(report);
    tfgkp_string_free(json);
    tfgkp_report_free(report);
    return 0;
}
