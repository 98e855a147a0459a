/*
 * PCI device access driver with a hot-reset dependency query.
 */

#include <linux/types.h>
#include <linux/fs.h>
#include <linux/miscdevice.h>
#include <uapi/linux/vfio.h>

struct vfio_pci_device {
	int irq_type;
	int num_regions;
	bool reset_works;
};

static int vfio_pci_count_devs(struct pci_dev *pdev, void *data)
{
	(*(int *)data)++;
	return 0;
}

struct vfio_pci_fill_info {
	int max;
	int cur;
	struct vfio_pci_dependent_device *devices;
};

static int vfio_pci_fill_devs(struct pci_dev *pdev, void *data)
{
	struct vfio_pci_fill_info *fill = data;

	if (fill->cur == fill->max)
		return -EAGAIN;

	fill->devices[fill->cur].segment = pci_domain_nr(pdev->bus);
	fill->devices[fill->cur].bus = pdev->bus->number;
	fill->devices[fill->cur].devfn = pdev->devfn;
	fill->cur++;
	return 0;
}

static long vfio_pci_ioctl(struct file *filp, unsigned int cmd,
			   unsigned long arg)
{
	struct vfio_pci_device *vdev = filp->private_data;

	if (cmd == VFIO_DEVICE_GET_INFO) {
		struct vfio_device_info info;

		if (copy_from_user(&info, (void __user *)arg, sizeof(info)))
			return -EFAULT;

		info.flags = VFIO_DEVICE_FLAGS_PCI;
		info.num_regions = vdev->num_regions;
		info.num_irqs = VFIO_PCI_NUM_IRQS;

		return copy_to_user((void __user *)arg, &info, sizeof(info)) ?
			-EFAULT : 0;

	} else if (cmd == VFIO_DEVICE_RESET) {
		if (!vdev->reset_works)
			return -EINVAL;
		return pci_try_reset_function(vdev);

	} else if (cmd == VFIO_DEVICE_GET_PCI_HOT_RESET_INFO) {
		struct vfio_pci_hot_reset_info hdr;
		struct vfio_pci_fill_info fill = { 0 };
		int count = 0;
		int ret;

		if (copy_from_user(&hdr, (void __user *)arg, sizeof(hdr)))
			return -EFAULT;

		if (hdr.argsz < sizeof(hdr))
			return -EINVAL;

		/* How many devices are affected? */
		ret = vfio_pci_for_each_slot_or_bus(vdev, vfio_pci_count_devs,
						    &count);
		if (ret)
			return ret;

		if (hdr.count < count) {
			hdr.count = count;
			goto reset_info_exit;
		}

		fill.max = count;
		fill.devices = kcalloc(count, sizeof(*fill.devices),
				       GFP_KERNEL);
		if (!fill.devices)
			return -ENOMEM;

		ret = vfio_pci_for_each_slot_or_bus(vdev, vfio_pci_fill_devs,
						    &fill);
		hdr.count = fill.cur;

reset_info_exit:
		if (copy_to_user((void __user *)arg, &hdr, sizeof(hdr)))
			ret = -EFAULT;
		kfree(fill.devices);
		return ret;
	}

	return -ENOTTY;
}

static int vfio_pci_open(struct inode *inode, struct file *filp)
{
	filp->private_data = vfio_device_data(inode);
	return 0;
}

static const struct file_operations vfio_pci_fops = {
	.owner		= THIS_MODULE,
	.open		= vfio_pci_open,
	.unlocked_ioctl	= vfio_pci_ioctl,
};

static struct miscdevice vfio_pci_dev = {
	.minor = MISC_DYNAMIC_MINOR,
	.name = "vfio-pci",
	.fops = &vfio_pci_fops,
	.nodename = "vfio/vfio-pci",
};

static int __init vfio_pci_init(void)
{
	return misc_register(&vfio_pci_dev);
}
