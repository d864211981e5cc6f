int fft_passes(int n) {
    if (n < 2) {
        return 0;
    }
    int re[n], im[n], len, i, j, half, tr, ti;
    for (i = 0; i < n; i++) {
        re[i] = (i * 271 + 17) % 521;
        im[i] = (i * 97 + 5) % 257;
    }
    len = 2;
    while (len <= n) {
        half = len / 2;
        i = 0;
        while (i + len <= n) {
            for (j = 0; j < half; j++) {
                tr = re[i + j + half] - im[i + j + half] / 2;
                ti = re[i + j + half] / 2 + im[i + j + half];
                re[i + j + half] = re[i + j] - tr;
                im[i + j + half] = im[i + j] - ti;
                re[i + j] = re[i + j] + tr;
                im[i + j] = im[i + j] + ti;
            }
            i = i + len;
        }
        len = len * 2;
    }
    return re[0] + im[0];
}
