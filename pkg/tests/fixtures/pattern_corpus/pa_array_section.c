#pragma omp parallel for reduction(+:hist[:64])
for (i = 0; i < n; i++) {
    hist[key[i]] += 1;
}
