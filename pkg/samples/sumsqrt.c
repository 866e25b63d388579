/* Sum-of-square-roots reduction over a large array.
 *
 * Heavy enough per element that the parallel version wins on real
 * multi-core hardware, which makes it a good speedup demonstration. */
#include <math.h>
#include <stdio.h>

int main(void) {
    static double a[2000000];
    long i;
    double s = -1.0;
    for (i = 0; i < 2000000; i++) {
        a[i] = (double)(i % 1000) * 0.001;
    }
#pragma experimental section start id=sumsqrt
    s = 0.0;
    for (i = 0; i < 2000000; i++) {
        s += sqrt(a[i] * a[i] + 1.0);
    }
#pragma experimental section stop id=sumsqrt
    printf("s = %.6f\n", s);
    return 0;
}
