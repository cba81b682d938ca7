int loop_break(int x, int y)
{
    int i = 0;
    x = x % 50;
    while (1) {
        if (i >= x)
            break;
        if (y > 0 && i == y)
            break;
        i++;
    }
    return i;
}
