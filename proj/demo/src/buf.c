#include <stdlib.h>
#include <string.h>

#include "demo.h"

static size_t grow_to(size_t cap, size_t need) {
  size_t c = cap ? cap : 16;
  while (c < need)
    c *= 2;
  return c;
}

static int reserve(struct buf *b, size_t need) {
  if (need <= b->cap)
    return 0;
  size_t c = grow_to(b->cap, need);
  char *p = realloc(b->data, c);
  if (!p)
    return -1;
  b->data = p;
  b->cap = c;
  return 0;
}

void buf_init(struct buf *b) {
  b->data = NULL;
  b->len = 0;
  b->cap = 0;
}

void buf_free(struct buf *b) {
  free(b->data);
  buf_init(b);
}

int buf_append(struct buf *b, const char *s, size_t n) {
  if (reserve(b, b->len + n + 1))
    return -1;
  memcpy(b->data + b->len, s, n);
  b->len += n;
  b->data[b->len] = '\0';
  return 0;
}

int buf_append_str(struct buf *b, const char *s) { return buf_append(b, s, strlen(s)); }
