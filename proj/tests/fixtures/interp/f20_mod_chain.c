int mod_chain(int a, int b)
{
    int r = 0;
    if (b != 0 && a != 0)
        r = a % b + a / b;
    if (r > 100)
        r = 100;
    return r;
}
