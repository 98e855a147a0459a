/*
 * Core mapped-device handling.
 */

#include <linux/types.h>
#include <linux/fs.h>
#include "dm-core.h"

#define DM_MSG_PREFIX "core"

static DEFINE_IDR(_minor_idr);

static int specific_minor(int minor)
{
	int r;

	if (minor >= (1 << 20))
		return -EINVAL;

	r = idr_alloc(&_minor_idr, MINOR_ALLOCED, minor, minor + 1, GFP_KERNEL);
	if (r < 0)
		return r == -ENOSPC ? -EBUSY : r;

	return 0;
}

static int next_free_minor(int *minor)
{
	int r;

	r = idr_alloc(&_minor_idr, MINOR_ALLOCED, 0, 1 << 20, GFP_KERNEL);
	if (r < 0)
		return r;

	*minor = r;
	return 0;
}

/*
 * Allocate and initialise a blank device with a given minor.
 */
int dm_create(int minor, struct mapped_device **result)
{
	int r;
	struct mapped_device *md;

	md = kvzalloc(sizeof(*md), GFP_KERNEL);
	if (!md)
		return -ENOMEM;

	if (minor < 0)
		r = next_free_minor(&minor);
	else
		r = specific_minor(minor);
	if (r < 0)
		goto bad;

	md->minor = minor;
	*result = md;
	return 0;

bad:
	kvfree(md);
	return r;
}

void dm_put(struct mapped_device *md)
{
	atomic_dec(&md->holders);
}

struct mapped_device *dm_get_md(u64 dev)
{
	struct mapped_device *md;
	unsigned int minor = MINOR(dev);

	if (MAJOR(dev) != _major || minor >= (1 << 20))
		return NULL;

	md = idr_find(&_minor_idr, minor);
	if (md)
		atomic_inc(&md->holders);
	return md;
}
