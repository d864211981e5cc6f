int topo(int n) {
    if (n < 1) {
        return 0;
    }
    int indeg[n], order[n], queue[n], qh = 0, qt = 0, u, v, d, processed = 0, i;
    for (i = 0; i < n; i++) {
        indeg[i] = 0;
    }
    for (u = 0; u < n; u++) {
        for (d = 1; d <= 3; d++) {
            v = u + d;
            if (v < n) {
                indeg[v] = indeg[v] + 1;
            }
        }
    }
    for (i = 0; i < n; i++) {
        if (indeg[i] == 0) {
            queue[qt] = i;
            qt = qt + 1;
        }
    }
    while (qh < qt) {
        u = queue[qh];
        qh = qh + 1;
        order[processed] = u;
        processed = processed + 1;
        for (d = 1; d <= 3; d++) {
            v = u + d;
            if (v < n) {
                indeg[v] = indeg[v] - 1;
                if (indeg[v] == 0) {
                    queue[qt] = v;
                    qt = qt + 1;
                }
            }
        }
    }
    return processed + order[0];
}
