#include <stdio.h>
#include "cklh.h"

int main(void) {
    CklhSystem *sys = NULL;
    if (cklh_i4_new(-1.0, &sys) != CKLH_STATUS_OK) {
        return 1;
    }
    double h[3], c;
    if (cklh_system_hamiltonians(sys, 0.3, -0.2, h) != CKLH_STATUS_OK
        || cklh_system_casimir(sys, 0.3, -0.2, &c) != CKLH_STATUS_OK) {
        char msg[256];
        cklh_last_error(msg, sizeof msg);
        fprintf(stderr, "%s\n", msg);
        cklh_system_free(sys);
        return 1;
    }
    printf("cklh %s h = (%.6f, %.6f, %.6f) casimir = %.12f\n", cklh_version(), h[0], h[1], h[2], c);
    cklh_system_free(sys);
    return (c + 0.25) * (c + 0.25) < 1e-20 ? 0 : 1;
}
