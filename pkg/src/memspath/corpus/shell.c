int shell(int n) {
    if (n < 1) {
        return 0;
    }
    int arr[n], gap, i, j, t;
    for (i = 0; i < n; i++) {
        arr[i] = (i * 613 + 29) % 1223;
    }
    gap = n / 2;
    while (gap > 0) {
        for (i = gap; i < n; i++) {
            j = i;
            while (j >= gap) {
                if (arr[j - gap] > arr[j]) {
                    t = arr[j];
                    arr[j] = arr[j - gap];
                    arr[j - gap] = t;
                    j = j - gap;
                } else {
                    j = 0;
                }
            }
        }
        gap = gap / 2;
    }
    return arr[0];
}
