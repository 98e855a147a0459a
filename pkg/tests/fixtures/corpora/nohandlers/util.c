/* Plain library code: nothing registers an operation handler here. */

struct span {
	unsigned long start;
	unsigned long len;
};

static int span_overlaps(const struct span *a, const struct span *b)
{
	return a->start < b->start + b->len && b->start < a->start + a->len;
}

int span_merge(struct span *dst, const struct span *src)
{
	if (!span_overlaps(dst, src))
		return -1;
	if (src->start < dst->start)
		dst->start = src->start;
	if (src->start + src->len > dst->start + dst->len)
		dst->len = src->start + src->len - dst->start;
	return 0;
}
