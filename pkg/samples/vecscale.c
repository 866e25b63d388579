/* Scaled vector add: the classic embarrassingly parallel loop. */
#include <stdio.h>

int main(void) {
    static double a[100000], b[100000];
    long i;
    double scale = 1.5;
    for (i = 0; i < 100000; i++) {
        a[i] = 0.0;
        b[i] = (double)i * 0.25;
    }
#pragma experimental section start id=vecscale
    for (i = 0; i < 100000; i++) {
        a[i] = scale * b[i] + 1.0;
    }
#pragma experimental section stop id=vecscale
    printf("a[99999] = %f\n", a[99999]);
    return 0;
}
