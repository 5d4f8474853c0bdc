#include <math.h>
#include <stdio.h>
#include <string.h>

#include "hausdim.h"

static int fail(const char *what) {
    char msg[256];
    hd_last_error_message(msg, sizeof msg);
    fprintf(stderr, "%s: %s\n", what, msg);
    return 1;
}

int main(void) {
    HdResidueSet *set = NULL;
    size_t members[] = {1, 3};
    if (hd_residue_set_new(4, members, 2, &set) != HD_STATUS_OK) return fail("new");

    HdDimensionBound *db = NULL;
    if (hd_dimension_bound_new(set, &db) != HD_STATUS_OK) return fail("bound");
    HdBoundSummary s;
    if (hd_dimension_bound_summary(db, &s) != HD_STATUS_OK) return fail("summary");
    if (fabs(s.bound - 0.5) > 1e-12 || s.q != 4) return fail("bound value");

    double w[4];
    size_t len = 0;
    if (hd_dimension_bound_witness(db, w, 4, &len) != HD_STATUS_OK || len != 4) return fail("witness");

    HdResidueSet *bad = NULL;
    if (hd_residue_set_parse(4, "7", &bad) != HD_STATUS_INVALID_INPUT) return fail("parse guard");
    if (hd_last_error_message(NULL, 0) == 0) return fail("message");

    double t3;
    if (hd_bound_theorem3(4, &t3) != HD_STATUS_OK || fabs(t3 - 0.5) > 1e-12) return fail("theorem3");

    hd_dimension_bound_free(db);
    hd_residue_set_free(set);
    printf("ok %s %.17g\n", hd_version(), s.bound);
    return 0;
}
