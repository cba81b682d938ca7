int bits(int v)
{
    int c = 0;
    v = v & 65535;
    while (v) {
        if (v & 1)
            c++;
        v = v >> 1;
    }
    return c;
}
