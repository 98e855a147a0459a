#include <linux/types.h>
#include <linux/fs.h>
#include <linux/miscdevice.h>

#define ALPHA_MAGIC 0xA1
#define ALPHA_RESET _IO(ALPHA_MAGIC, 0x00)
#define ALPHA_SET_GAIN _IOW(ALPHA_MAGIC, 0x01, __u32)

static long alpha_ioctl(struct file *filp, unsigned int cmd,
			unsigned long arg)
{
	switch (cmd) {
	case ALPHA_RESET:
		return alpha_hw_reset();
	case ALPHA_SET_GAIN: {
		u32 gain;

		if (copy_from_user(&gain, (void __user *)arg, sizeof(gain)))
			return -EFAULT;
		return alpha_hw_set_gain(gain);
	}
	}
	return -ENOTTY;
}

static const struct file_operations alpha_fops = {
	.owner = THIS_MODULE,
	.unlocked_ioctl = alpha_ioctl,
};

static struct miscdevice alpha_dev = {
	.minor = MISC_DYNAMIC_MINOR,
	.name = "alpha",
	.fops = &alpha_fops,
};

static int __init alpha_init(void)
{
	return misc_register(&alpha_dev);
}
