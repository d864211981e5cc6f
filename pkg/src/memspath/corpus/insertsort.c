int insertsort(int n) {
    if (n < 1) {
        return 0;
    }
    int arr[n], i, j, key, done;
    for (i = 0; i < n; i++) {
        arr[i] = (i * 104729 + 7) % 1913;
    }
    for (i = 1; i < n; i++) {
        key = arr[i];
        j = i - 1;
        done = 0;
        while (done == 0) {
            if (j < 0) {
                done = 1;
            } else {
                if (arr[j] > key) {
                    arr[j + 1] = arr[j];
                    j = j - 1;
                } else {
                    done = 1;
                }
            }
        }
        arr[j + 1] = key;
    }
    return arr[n / 2];
}
