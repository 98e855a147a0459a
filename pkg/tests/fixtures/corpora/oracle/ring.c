/* Tiny ring buffer used to pin the indexer against a naive oracle. */

#include "ring.h"

static unsigned int ring_mask(const struct ring *r)
{
	return r->size - 1;
}

int ring_push(struct ring *r, int value)
{
	if (r->head - r->tail == r->size)
		return -1;
	r->slots[r->head & ring_mask(r)] = value;
	r->head++;
	return 0;
}

int ring_pop(struct ring *r, int *value)
{
	if (r->head == r->tail)
		return -1;
	*value = r->slots[r->tail & ring_mask(r)];
	r->tail++;
	return 0;
}
