#ifndef FIX_CMDS_H
#define FIX_CMDS_H

#include "types.h"

struct frob_config {
	__u32 mode;
	__u32 mask;
	__u64 window;
};

struct frob_report {
	__u16 id;
	__u16 state;
	__u32 events;
	__u8 tag[6];
};

union frob_value {
	__u64 raw;
	__u32 words[2];
	__u8 bytes[8];
};

#define FROB_MAGIC 0xF4
#define FROB_ALT_MAGIC ('k')
#define FROB_NR_BASE 0x20

#define FROB_PING        _IO(FROB_MAGIC, 0x00)
#define FROB_ENABLE      _IO(FROB_MAGIC, FROB_NR_BASE + 1)
#define FROB_SET_CONFIG  _IOW(FROB_MAGIC, 0x02, struct frob_config)
#define FROB_GET_CONFIG  _IOR(FROB_MAGIC, 0x03, struct frob_config)
#define FROB_XFER        _IOWR(FROB_MAGIC, 0x04, union frob_value)
#define FROB_GET_REPORT  _IOR(FROB_MAGIC, 0x05, struct frob_report)
#define FROB_SET_MODE    _IOW(FROB_ALT_MAGIC, 0x10, __u32)
#define FROB_GET_TICKS   _IOR(FROB_ALT_MAGIC, 0x11, __u64)
#define FROB_SET_NAME    _IOW(FROB_MAGIC, 0x06, unsigned long)
#define FROB_WAIT        _IOWR(FROB_MAGIC, FROB_NR_BASE + 2, int)

#endif
