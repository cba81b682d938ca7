int for_empty_init(int n)
{
    int i = 0;
    int s = 1;
    n = n & 15;
    for (; i < n; i += 2) {
        s = s * 3;
        if (s > 1000 && i > 3)
            s = s - 1000;
    }
    return s;
}
