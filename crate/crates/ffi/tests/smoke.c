#include <math.h>
#include <stdio.h>
#include "passivity.h"

int main(void) {
    double a = 0.5, b = 1.0, c = 1.0, d = 1.0, rho = 0.0;
    PassivityModel *m = NULL;
    if (passivity_model_new(1, 1, &a, NULL, &b, NULL, &c, NULL, &d, NULL, &m) != PASSIVITY_STATUS_OK) return 1;
    if (passivity_x_radius(m, NULL, NULL, NULL, &rho) != PASSIVITY_STATUS_OK) return 2;
    passivity_model_free(m);
    d = -0.2;
    if (passivity_model_new(1, 1, &a, NULL, &b, NULL, &c, NULL, &d, NULL, &m) != PASSIVITY_STATUS_OK) return 3;
    double r2;
    if (passivity_x_radius(m, NULL, NULL, NULL, &r2) != PASSIVITY_STATUS_DOMAIN) return 4;
    if (passivity_last_error() == NULL) return 5;
    passivity_model_free(m);
    printf("%.12f\n", rho);
    return fabs(rho - (1.25 - sqrt(1.0625))) < 1e-8 ? 0 : 6;
}
