#ifndef DEMO_H
#define DEMO_H

#include <stddef.h>
#include <stdint.h>

struct buf {
  char *data;
  size_t len, cap;
};

void buf_init(struct buf *b);
void buf_free(struct buf *b);
int buf_append(struct buf *b, const char *s, size_t n);
int buf_append_str(struct buf *b, const char *s);

struct word_table;
struct word_table *table_new(size_t buckets);
void table_free(struct word_table *t);
int table_add(struct word_table *t, const char *w, size_t n);
size_t table_count(const struct word_table *t, const char *w);
size_t table_distinct(const struct word_table *t);
void table_top(const struct word_table *t, const char **words, size_t *counts, size_t k);

uint32_t hash_fnv1a(const char *s, size_t n);
uint32_t hash_crc32(const unsigned char *p, size_t n);
uint64_t hash_mix(uint64_t h);

size_t tokenize(const char *text, struct word_table *t);
void report(const struct word_table *t, const char *text, struct buf *out);

#endif
