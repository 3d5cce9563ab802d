#include "demo.h"

static uint32_t crc_table[256];
static int crc_ready;

static uint32_t crc_entry(uint32_t c) {
  for (int k = 0; k < 8; ++k)
    c = (c & 1) ? 0xedb88320u ^ (c >> 1) : c >> 1;
  return c;
}

static void crc_init(void) {
  for (uint32_t i = 0; i < 256; ++i)
    crc_table[i] = crc_entry(i);
  crc_ready = 1;
}

uint32_t hash_fnv1a(const char *s, size_t n) {
  uint32_t h = 2166136261u;
  for (size_t i = 0; i < n; ++i) {
    h ^= (unsigned char)s[i];
    h *= 16777619u;
  }
  return h;
}

uint32_t hash_crc32(const unsigned char *p, size_t n) {
  if (!crc_ready)
    crc_init();
  uint32_t c = 0xffffffffu;
  for (size_t i = 0; i < n; ++i)
    c = crc_table[(c ^ p[i]) & 0xff] ^ (c >> 8);
  return c ^ 0xffffffffu;
}

static uint64_t rotl(uint64_t x, int r) { return (x << r) | (x >> (64 - r)); }

uint64_t hash_mix(uint64_t h) {
  h ^= h >> 33;
  h *= 0xff51afd7ed558ccdull;
  h = rotl(h, 17);
  h ^= h >> 33;
  h *= 0xc4ceb9fe1a85ec53ull;
  return h ^ (h >> 33);
}
