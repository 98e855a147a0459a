/*
 * Ioctl interface for the device mapper control device.
 */

#include <linux/types.h>
#include <linux/fs.h>
#include <linux/miscdevice.h>
#include <uapi/linux/dm-ioctl.h>

#define DM_DRIVER_EMAIL "dm-devel@lists.linux.dev"

struct hash_cell {
	struct mapped_device *md;
	char *name;
	char *uuid;
};

typedef int (*ioctl_fn)(struct file *file, struct dm_ioctl *param,
			size_t param_size);

static int dm_version_ioctl(struct file *file, struct dm_ioctl *param,
			    size_t param_size)
{
	/* version negotiation happens before anything else */
	param->version[0] = DM_VERSION_MAJOR;
	param->version[1] = DM_VERSION_MINOR;
	param->version[2] = DM_VERSION_PATCHLEVEL;
	return 0;
}

static int remove_all(struct file *file, struct dm_ioctl *param,
		      size_t param_size)
{
	dm_hash_remove_all(1, 1, 0);
	param->data_size = 0;
	return 0;
}

static int list_devices(struct file *file, struct dm_ioctl *param,
			size_t param_size)
{
	struct hash_cell *hc;
	unsigned int needed = 0;

	needed = list_devices_needed_size();
	if (param->data_size < needed) {
		param->flags |= DM_BUFFER_FULL_FLAG;
		return 0;
	}
	fill_device_list(param, needed);
	return 0;
}

static int dev_create(struct file *file, struct dm_ioctl *param,
		      size_t param_size)
{
	int r;
	struct mapped_device *md;

	r = check_name(param->name);
	if (r)
		return r;

	r = dm_create(param->dev, &md);
	if (r)
		return r;

	param->open_count = 0;
	param->event_nr = 0;
	return 0;
}

static int table_status(struct file *file, struct dm_ioctl *param,
			size_t param_size)
{
	struct hash_cell *hc;

	hc = find_device(param);
	if (!hc)
		return -ENXIO;

	__dev_status(hc->md, param);
	retrieve_status(hc, param, param_size);
	return 0;
}

/*
 * Implementation of open/close/ioctl on the special char device.
 */
static ioctl_fn lookup_ioctl(unsigned int cmd, int *ioctl_flags)
{
	static const struct {
		int cmd;
		int flags;
		ioctl_fn fn;
	} _ioctls[] = {
		{DM_VERSION_CMD, 0, dm_version_ioctl},
		{DM_REMOVE_ALL_CMD, 0, remove_all},
		{DM_LIST_DEVICES_CMD, 0, list_devices},
		{DM_DEV_CREATE_CMD, 0, dev_create},
		{DM_TABLE_STATUS_CMD, 0, table_status},
	};

	if (unlikely(cmd >= ARRAY_SIZE(_ioctls)))
		return NULL;

	*ioctl_flags = _ioctls[cmd].flags;
	return _ioctls[cmd].fn;
}

static int ctl_ioctl(struct file *file, unsigned int command,
		     struct dm_ioctl __user *user)
{
	int r = 0;
	int ioctl_flags;
	unsigned int cmd;
	struct dm_ioctl *param;
	ioctl_fn fn = NULL;
	size_t input_param_size;
	struct dm_ioctl param_kernel;

	/* only root can play with this */
	if (!capable(CAP_SYS_ADMIN))
		return -EACCES;

	if (_IOC_TYPE(command) != DM_IOCTL)
		return -ENOTTY;

	cmd = _IOC_NR(command);

	/*
	 * Check the interface version passed in.  This also
	 * writes out the kernel's interface version.
	 */
	r = check_version(cmd, user);
	if (r)
		return r;

	/*
	 * Nothing more to do for the version command.
	 */
	if (cmd == DM_VERSION_CMD)
		return 0;

	fn = lookup_ioctl(cmd, &ioctl_flags);
	if (!fn) {
		DMERR("dm_ctl_ioctl: unknown command 0x%x", command);
		return -ENOTTY;
	}

	r = copy_params(user, &param_kernel, ioctl_flags, &param);
	if (r)
		return r;

	input_param_size = param->data_size;
	r = validate_params(cmd, param);
	if (r)
		goto out;

	param->data_size = offsetof(struct dm_ioctl, data);
	r = fn(file, param, input_param_size);

	if (r)
		goto out;

	r = copy_to_user(user, param, param->data_size) ? -EFAULT : 0;

out:
	free_params(param, input_param_size, ioctl_flags);
	return r;
}

static long dm_ctl_ioctl(struct file *file, unsigned int command,
			 unsigned long u)
{
	return (long)ctl_ioctl(file, command, (struct dm_ioctl __user *)u);
}

static int dm_open(struct inode *inode, struct file *filp)
{
	/* only root can open this */
	if (!capable(CAP_SYS_ADMIN))
		return -EACCES;
	filp->private_data = NULL;
	return 0;
}

static int dm_release(struct inode *inode, struct file *filp)
{
	return 0;
}

static const struct file_operations _ctl_fops = {
	.open    = dm_open,
	.release = dm_release,
	.unlocked_ioctl	 = dm_ctl_ioctl,
	.compat_ioctl = dm_ctl_ioctl,
	.owner	 = THIS_MODULE,
};

static struct miscdevice _dm_misc = {
	.minor		= MAPPER_CTRL_MINOR,
	.name		= DM_NAME,
	.nodename	= DM_DIR "/" DM_CONTROL_NODE,
	.fops		= &_ctl_fops
};

/*
 * Create misc character device and link to DM_DIR/DM_CONTROL_NODE.
 */
int __init dm_interface_init(void)
{
	int r;

	r = misc_register(&_dm_misc);
	if (r) {
		DMERR("misc_register failed for control device");
		return r;
	}

	DMINFO("%d.%d.%d%s initialised: %s", DM_VERSION_MAJOR,
	       DM_VERSION_MINOR, DM_VERSION_PATCHLEVEL, DM_VERSION_EXTRA,
	       DM_DRIVER_EMAIL);
	return 0;
}

void dm_interface_exit(void)
{
	misc_deregister(&_dm_misc);
	dm_hash_exit();
}
