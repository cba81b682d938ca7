int find_first(int n, int k)
{
    int i;
    int found = -1;
    n = n % 12;
    for (i = 0; i < n; i++) {
        if (i * i > k) {
            found = i;
            break;
        }
    }
    return found;
}
