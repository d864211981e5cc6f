int bubble(int n) {
    if (n < 1) {
        return 0;
    }
    int arr[n], i, j, t;
    for (i = 0; i < n; i++) {
        arr[i] = (i * 7919 + 13) % 977;
    }
    for (i = 0; i < n - 1; i++) {
        for (j = 0; j < n - 1 - i; j++) {
            if (arr[j] > arr[j + 1]) {
                t = arr[j];
                arr[j] = arr[j + 1];
                arr[j + 1] = t;
            }
        }
    }
    return arr[0] + arr[n - 1];
}
