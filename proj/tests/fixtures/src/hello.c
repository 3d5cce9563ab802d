#include <stdio.h>

static int square(int x) { return x * x; }

static int sum_squares(int n) {
  int total = 0;
  for (int i = 1; i <= n; ++i)
    total += square(i);
  return total;
}

int main(void) {
  printf("%d\n", sum_squares(10));
  return 0;
}
