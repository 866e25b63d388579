/* Prefix-sum style loop with a loop-carried dependence: each iteration
 * reads the value the previous one wrote, so it must stay serial. */
#include <stdio.h>

int main(void) {
    static double c[4000], b[4000];
    long i;
    for (i = 0; i < 4000; i++) {
        b[i] = (double)i * 0.5;
        c[i] = 0.0;
    }
    c[0] = 1.0;
#pragma experimental section start id=chain_dp
    for (i = 1; i < 4000; i++) {
        c[i] = c[i - 1] + b[i];
    }
#pragma experimental section stop id=chain_dp
    printf("c[3999] = %f\n", c[3999]);
    return 0;
}
