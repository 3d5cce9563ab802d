#include <stdio.h>
#include <stdlib.h>

struct stack {
  int items[64];
  int top;
};

static void push(struct stack *s, int v) {
  if (s->top < 64)
    s->items[s->top++] = v;
}

static int pop(struct stack *s) { return s->top > 0 ? s->items[--s->top] : 0; }

__attribute__((noinline)) static int apply(char op, int a, int b) {
  switch (op) {
  case '+': return a + b;
  case '-': return a - b;
  case '*': return a * b;
  case '/': return b ? a / b : 0;
  }
  return 0;
}

__attribute__((noinline)) int evaluate(const char *expr) {
  struct stack s = {{0}, 0};
  for (const char *p = expr; *p; ++p) {
    if (*p >= '0' && *p <= '9')
      push(&s, *p - '0');
    else if (*p != ' ') {
      int b = pop(&s);
      int a = pop(&s);
      push(&s, apply(*p, a, b));
    }
  }
  return pop(&s);
}

int fib(int n) { return n < 2 ? n : fib(n - 1) + fib(n - 2); }

int main(int argc, char **argv) {
  const char *expr = argc > 1 ? argv[1] : "34+2*";
  printf("%d %d\n", evaluate(expr), fib(atoi("10")));
  return 0;
}
