#include <stdio.h>
#include <string.h>

#include "psdcomp.h"

int main(void) {
    const double n_data[4] = {1.0, 0.5, 0.5, 1.0};
    const double v_data[4] = {2.0, 0.0, 0.0, 1.0};
    PsdcompMatrix *n = NULL, *v = NULL, *out = NULL;
    if (psdcomp_matrix_new(n_data, 2, &n) != PSDCOMP_STATUS_OK) return 1;
    if (psdcomp_matrix_new(v_data, 2, &v) != PSDCOMP_STATUS_OK) return 1;
    if (psdcomp_compose("traced-noun", n, v, &out) != PSDCOMP_STATUS_OK) return 2;

    double data[4];
    if (psdcomp_matrix_data(out, data, 4) != PSDCOMP_STATUS_OK) return 3;
    double score = 0.0;
    if (psdcomp_score("kba", out, out, &score) != PSDCOMP_STATUS_OK) return 4;

    PsdcompMatrix *bad = NULL;
    if (psdcomp_compose("nope", n, v, &bad) != PSDCOMP_STATUS_UNKNOWN_RULE) return 5;
    if (strstr(psdcomp_last_error(), "nope") == NULL) return 6;

    printf("%g %g %g %g %g\n", data[0], data[1], data[2], data[3], score);
    psdcomp_matrix_free(out);
    psdcomp_matrix_free(n);
    psdcomp_matrix_free(v);
    return 0;
}
