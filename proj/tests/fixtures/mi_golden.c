/* Golden fixture for the complexity metrics. */
int clamp_sum(int *v, int n, int lo, int hi)
{
    int total = 0;
    int count = 0;

    // accumulate the in-range entries
    for (int i = 0; i < n; i++) {
        if (v[i] >= lo && v[i] <= hi) {
            total += v[i];
            count++;
        }
    }
    while (total > hi)
        total -= hi; /* wrap */
    return count ? total : 0;
}
