int change(int amount) {
    int count[1], a, b, c, ways = 0;
    for (a = 0; a * 25 <= amount; a++) {
        for (b = 0; b * 10 <= amount - a * 25; b++) {
            for (c = 0; c * 5 <= amount - a * 25 - b * 10; c++) {
                ways = ways + 1;
            }
        }
    }
    count[0] = ways;
    return count[0];
}
