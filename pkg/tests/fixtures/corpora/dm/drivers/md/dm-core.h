#ifndef DM_CORE_INTERNAL_FIX_H
#define DM_CORE_INTERNAL_FIX_H

#include <linux/types.h>

#define DM_BUFFER_FULL_FLAG (1 << 8)

struct dm_table;

struct mapped_device {
	int minor;
	unsigned long flags;
	struct dm_table *map;
	atomic_t holders;
	atomic_t open_count;
	void *interface_ptr;
};

int dm_create(int minor, struct mapped_device **md);
void dm_put(struct mapped_device *md);
int dm_hash_remove_all(int keep_open_devices, int mark_deferred,
		       int only_deferred);
void dm_hash_exit(void);

#endif
