#include <stdlib.h>
#include <string.h>

#include "demo.h"

struct entry {
  char *word;
  size_t count;
  struct entry *next;
};

struct word_table {
  struct entry **slots;
  size_t buckets, distinct;
};

static size_t slot_of(const struct word_table *t, const char *w, size_t n) {
  return hash_mix(hash_fnv1a(w, n)) % t->buckets;
}

static char *copy_word(const char *w, size_t n) {
  char *p = malloc(n + 1);
  if (!p)
    return NULL;
  memcpy(p, w, n);
  p[n] = '\0';
  return p;
}

static struct entry *find(const struct word_table *t, const char *w, size_t n) {
  for (struct entry *e = t->slots[slot_of(t, w, n)]; e; e = e->next)
    if (strlen(e->word) == n && memcmp(e->word, w, n) == 0)
      return e;
  return NULL;
}

struct word_table *table_new(size_t buckets) {
  struct word_table *t = malloc(sizeof *t);
  if (!t)
    return NULL;
  t->buckets = buckets ? buckets : 1;
  t->distinct = 0;
  t->slots = calloc(t->buckets, sizeof *t->slots);
  if (!t->slots) {
    free(t);
    return NULL;
  }
  return t;
}

void table_free(struct word_table *t) {
  for (size_t i = 0; i < t->buckets; ++i) {
    struct entry *e = t->slots[i];
    while (e) {
      struct entry *next = e->next;
      free(e->word);
      free(e);
      e = next;
    }
  }
  free(t->slots);
  free(t);
}

int table_add(struct word_table *t, const char *w, size_t n) {
  struct entry *e = find(t, w, n);
  if (e) {
    e->count++;
    return 0;
  }
  e = malloc(sizeof *e);
  if (!e)
    return -1;
  e->word = copy_word(w, n);
  if (!e->word) {
    free(e);
    return -1;
  }
  e->count = 1;
  size_t s = slot_of(t, w, n);
  e->next = t->slots[s];
  t->slots[s] = e;
  t->distinct++;
  return 0;
}

size_t table_count(const struct word_table *t, const char *w) {
  struct entry *e = find(t, w, strlen(w));
  return e ? e->count : 0;
}

size_t table_distinct(const struct word_table *t) { return t->distinct; }

static int beats(const struct entry *e, const char *word, size_t count) {
  if (e->count != count)
    return e->count > count;
  return strcmp(e->word, word) < 0;
}

void table_top(const struct word_table *t, const char **words, size_t *counts, size_t k) {
  for (size_t i = 0; i < k; ++i) {
    words[i] = "";
    counts[i] = 0;
  }
  for (size_t b = 0; b < t->buckets; ++b)
    for (const struct entry *e = t->slots[b]; e; e = e->next) {
      size_t i = k;
      while (i > 0 && beats(e, words[i - 1], counts[i - 1]))
        --i;
      if (i == k)
        continue;
      for (size_t j = k - 1; j > i; --j) {
        words[j] = words[j - 1];
        counts[j] = counts[j - 1];
      }
      words[i] = e->word;
      counts[i] = e->count;
    }
}
