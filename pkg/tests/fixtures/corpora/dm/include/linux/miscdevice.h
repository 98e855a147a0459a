#ifndef _FIX_LINUX_MISCDEVICE_H
#define _FIX_LINUX_MISCDEVICE_H

#define MISC_DYNAMIC_MINOR 255
#define MAPPER_CTRL_MINOR 236

struct miscdevice {
	int minor;
	const char *name;
	const struct file_operations *fops;
	const char *nodename;
	unsigned short mode;
};

int misc_register(struct miscdevice *misc);
void misc_deregister(struct miscdevice *misc);

#endif
