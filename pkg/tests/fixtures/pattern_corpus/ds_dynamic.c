#pragma omp parallel for schedule(dynamic)
for (i = 0; i < n; i++) {
    w[i] = w[i] * s;
}
