/*
 * Table building for mapped devices.
 */

#include <linux/types.h>
#include "dm-core.h"

#define NODE_SIZE 252
#define KEYS_PER_NODE (NODE_SIZE / sizeof(u64))

struct dm_table {
	struct mapped_device *md;
	unsigned int depth;
	unsigned int counts[8];
	u64 *index[8];
	unsigned int num_targets;
};

static unsigned int int_log(unsigned int n, unsigned int base)
{
	int result = 0;

	while (n > 1) {
		n = (n + base - 1) / base;
		result++;
	}

	return result;
}

int dm_table_create(struct dm_table **result, int mode,
		    unsigned int num_targets, struct mapped_device *md)
{
	struct dm_table *t = kzalloc(sizeof(*t), GFP_KERNEL);

	if (!t)
		return -ENOMEM;

	t->md = md;
	t->num_targets = num_targets;
	t->depth = int_log(num_targets, KEYS_PER_NODE);
	*result = t;
	return 0;
}

void dm_table_destroy(struct dm_table *t)
{
	if (!t)
		return;
	kfree(t);
}
