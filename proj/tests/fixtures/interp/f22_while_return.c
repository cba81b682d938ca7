int while_return(int a)
{
    int k = a & 7;
    while (k < 20) {
        if (k == 13)
            return k;
        k += 3;
    }
    k = k - 20;
    return k;
}
