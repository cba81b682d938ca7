int nested(int n, int m)
{
    int i = 0;
    int j;
    int c = 0;
    n = n & 7;
    m = m & 7;
    while (i < n) {
        j = 0;
        while (j < m) {
            if (i == j)
                c++;
            j++;
        }
        i++;
    }
    return c;
}
