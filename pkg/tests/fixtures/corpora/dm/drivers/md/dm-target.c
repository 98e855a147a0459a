#include <linux/types.h>
#include "dm-core.h"

static LIST_HEAD(_targets);

static struct target_type *__find_target_type(const char *name)
{
	struct target_type *tt;

	list_for_each_entry(tt, &_targets, list) {
		if (!strcmp(name, tt->name))
			return tt;
	}

	return NULL;
}

struct target_type *dm_get_target_type(const char *name)
{
	struct target_type *tt;

	tt = __find_target_type(name);
	if (tt && !try_module_get(tt->module))
		tt = NULL;

	return tt;
}

void dm_put_target_type(struct target_type *tt)
{
	module_put(tt->module);
}

int dm_register_target(struct target_type *tt)
{
	if (__find_target_type(tt->name))
		return -EEXIST;
	list_add(&tt->list, &_targets);
	return 0;
}
