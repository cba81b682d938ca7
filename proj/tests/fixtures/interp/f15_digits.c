int digits(int v)
{
    int d = 0;
    if (v < 0)
        v = -(v / 10);
    do {
        v = v / 10;
        d++;
    } while (v > 0);
    return d;
}
