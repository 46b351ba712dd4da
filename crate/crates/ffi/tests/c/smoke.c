#include <stdio.h>
#include <string.h>
#include "utpc.h"

int main(void) {
    UtpcField *f = NULL;
    if (utpc_field_new(3, 1, &f) != UTPC_STATUS_OK) return 1;
    uint8_t xs[] = {1, 2, 0}, ys[] = {0, 1, 1};
    UtpcElement *x = NULL, *y = NULL, *c = NULL, *b = NULL, *d = NULL, *back = NULL;
    if (utpc_element_new(f, 3, xs, 3, &x) != UTPC_STATUS_OK) return 2;
    if (utpc_element_new(f, 3, ys, 3, &y) != UTPC_STATUS_OK) return 3;
    if (utpc_element_commutator(x, y, &c) != UTPC_STATUS_OK) return 4;
    if (utpc_factor_commutator(c, &b, &d) != UTPC_STATUS_OK) return 5;
    if (utpc_element_commutator(b, d, &back) != UTPC_STATUS_OK) return 6;
    bool same = false;
    utpc_element_equal(c, back, &same);
    if (!same) return 7;
    if (utpc_factor_commutator(x, &b, &d) != UTPC_STATUS_PRECONDITION) return 8;
    if (strlen(utpc_last_error_message()) == 0) return 9;
    uint8_t e[3];
    utpc_element_entries(c, e, 3);
    printf("%u %u %u\n", e[0], e[1], e[2]);
    utpc_element_free(x); utpc_element_free(y); utpc_element_free(c);
    utpc_element_free(b); utpc_element_free(d); utpc_element_free(back);
    utpc_field_free(f);
    return 0;
}
