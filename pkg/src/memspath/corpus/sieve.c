int sieve(int n) {
    if (n < 2) {
        return 0;
    }
    int flags[n + 1], i, j, count = 0;
    for (i = 0; i <= n; i++) {
        flags[i] = 1;
    }
    i = 2;
    while (i * i <= n) {
        if (flags[i] == 1) {
            j = i * i;
            while (j <= n) {
                flags[j] = 0;
                j = j + i;
            }
        }
        i = i + 1;
    }
    for (i = 2; i <= n; i++) {
        if (flags[i] == 1) {
            count = count + 1;
        }
    }
    return count;
}
