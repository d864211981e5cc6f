void test(int n, int mode) {
    int arr[n], a = 0, b = 0;
    for (int i = 0; i < n; i++) {
        if (mode > 0) {
            arr[i] = i * 2 + arr[i];
            mode = mode - 1;
        } else {
            b = i * 3 + b;
            mode = mode - 1;
        }
    }
}
