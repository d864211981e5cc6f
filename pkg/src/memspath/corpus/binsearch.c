int binsearch(int n) {
    if (n < 1) {
        return 0;
    }
    int arr[n], i, lo, hi, mid, target, found = 0;
    for (i = 0; i < n; i++) {
        arr[i] = i * 2;
    }
    for (i = 0; i < n; i++) {
        target = (i * 7) % (2 * n);
        lo = 0;
        hi = n - 1;
        while (lo <= hi) {
            mid = (lo + hi) / 2;
            if (arr[mid] == target) {
                found = found + 1;
                lo = hi + 1;
            } else {
                if (arr[mid] < target) {
                    lo = mid + 1;
                } else {
                    hi = mid - 1;
                }
            }
        }
    }
    return found;
}
