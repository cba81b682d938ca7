int early_exit(int n, int limit)
{
    int i = 0;
    int acc = 0;
    n = n % 30;
    while (i < n) {
        acc += i;
        if (acc > limit)
            return acc;
        i++;
    }
    return -acc;
}
