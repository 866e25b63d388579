#pragma omp parallel
{
#pragma omp for
    for (i = 0; i < n; i++) a[i] = 0.0;
#pragma omp for
    for (j = 0; j < n; j++) b[j] = 1.0;
}
