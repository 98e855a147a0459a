#ifndef _LINUX_DM_IOCTL_V4_H
#define _LINUX_DM_IOCTL_V4_H

#include <linux/types.h>

#define DM_DIR "mapper"
#define DM_CONTROL_NODE "control"
#define DM_MAX_TYPE_NAME 16
#define DM_NAME_LEN 128
#define DM_UUID_LEN 129

/*
 * Implements a traditional ioctl interface to the device mapper.
 * All ioctl arguments consist of a single chunk of memory, with
 * this structure at the start.
 */
struct dm_ioctl {
	__u32 version[3];	/* in/out */
	__u32 data_size;	/* total size of data passed in
				 * including this struct */

	__u32 data_start;	/* offset to start of data
				 * relative to start of this struct */

	__u32 target_count;	/* in/out */
	__s32 open_count;	/* out */
	__u32 flags;		/* in/out */
	__u32 event_nr;		/* in/out */
	__u32 padding;

	__u64 dev;		/* in/out */

	char name[DM_NAME_LEN];	/* device name */
	char uuid[DM_UUID_LEN];	/* unique identifier for
				 * the block device */
	char data[7];		/* padding or data */
};

struct dm_target_spec {
	__u64 sector_start;
	__u64 length;
	__s32 status;

	__u32 next;

	char target_type[DM_MAX_TYPE_NAME];
};

#define DM_VERSION_CMD 0x00
#define DM_REMOVE_ALL_CMD 0x01
#define DM_LIST_DEVICES_CMD 0x02
#define DM_DEV_CREATE_CMD 0x03
#define DM_TABLE_STATUS_CMD 0x0c

#define DM_IOCTL 0xfd

#define DM_VERSION       _IOWR(DM_IOCTL, DM_VERSION_CMD, struct dm_ioctl)
#define DM_REMOVE_ALL    _IOWR(DM_IOCTL, DM_REMOVE_ALL_CMD, struct dm_ioctl)
#define DM_LIST_DEVICES  _IOWR(DM_IOCTL, DM_LIST_DEVICES_CMD, struct dm_ioctl)
#define DM_DEV_CREATE    _IOWR(DM_IOCTL, DM_DEV_CREATE_CMD, struct dm_ioctl)
#define DM_TABLE_STATUS  _IOWR(DM_IOCTL, DM_TABLE_STATUS_CMD, struct dm_ioctl)

#define DM_VERSION_MAJOR	4
#define DM_VERSION_MINOR	48
#define DM_VERSION_PATCHLEVEL	0

#define DM_NAME "device-mapper"

#endif				/* _LINUX_DM_IOCTL_H */
