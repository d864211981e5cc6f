int array_ops(int n) {
    if (n < 1) {
        return 0;
    }
    int arr[n], i, sum = 0, maxv = 0, t;
    for (i = 0; i < n; i++) {
        arr[i] = (i * 37 + 11) % 1009;
    }
    for (i = 0; i < n; i++) {
        sum = sum + arr[i];
    }
    for (i = 0; i < n; i++) {
        if (arr[i] > maxv) {
            maxv = arr[i];
        }
    }
    i = 0;
    while (i < n - 1 - i) {
        t = arr[i];
        arr[i] = arr[n - 1 - i];
        arr[n - 1 - i] = t;
        i = i + 1;
    }
    return sum + maxv;
}
