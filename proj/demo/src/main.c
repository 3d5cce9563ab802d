#include <ctype.h>
#include <stdio.h>
#include <string.h>

#include "demo.h"

static const char *sample =
    "the quick brown fox jumps over the lazy dog and the dog sleeps while the fox "
    "runs over the hill and back again because the fox is quick and the dog is lazy";

static int is_word_char(char c) { return isalnum((unsigned char)c) || c == '\''; }

static size_t skip_space(const char *s, size_t i) {
  while (s[i] && !is_word_char(s[i]))
    ++i;
  return i;
}

size_t tokenize(const char *text, struct word_table *t) {
  size_t words = 0;
  size_t i = skip_space(text, 0);
  while (text[i]) {
    size_t start = i;
    while (text[i] && is_word_char(text[i]))
      ++i;
    if (table_add(t, text + start, i - start) == 0)
      ++words;
    i = skip_space(text, i);
  }
  return words;
}

static void append_number(struct buf *out, const char *label, unsigned long long v) {
  char line[96];
  int n = snprintf(line, sizeof line, "%s %llu\n", label, v);
  if (n > 0)
    buf_append(out, line, (size_t)n);
}

void report(const struct word_table *t, const char *text, struct buf *out) {
  const char *words[5];
  size_t counts[5];
  table_top(t, words, counts, 5);
  append_number(out, "distinct", table_distinct(t));
  for (int i = 0; i < 5 && counts[i]; ++i) {
    buf_append_str(out, words[i]);
    append_number(out, ":", counts[i]);
  }
  append_number(out, "crc32", hash_crc32((const unsigned char *)text, strlen(text)));
  append_number(out, "the", table_count(t, "the"));
}

int main(int argc, char **argv) {
  const char *text = argc > 1 ? argv[1] : sample;
  struct word_table *t = table_new(31);
  if (!t)
    return 1;
  size_t n = tokenize(text, t);
  struct buf out;
  buf_init(&out);
  append_number(&out, "words", n);
  report(t, text, &out);
  fputs(out.data ? out.data : "", stdout);
  buf_free(&out);
  table_free(t);
  return 0;
}
