int sum_range(int n)
{
    int total = 0;
    int i;
    n = n % 20;
    for (i = 0; i < n; i++)
        total += i;
    return total;
}
