#ifndef _RDS_RDS_FIX_H
#define _RDS_RDS_FIX_H

#include <linux/types.h>

#define RDS_PROTOCOL_VERSION 4

/* socket options */
#define RDS_CANCEL_SENT_TO	1
#define RDS_GET_MR		2
#define RDS_FREE_MR		3
#define RDS_RECVERR		5
#define RDS_CONG_MONITOR	6

struct rds_get_mr_args {
	__u64 vec_addr;
	__u64 cookie_addr;
	__u64 flags;
};

struct rds_sock {
	struct sock *rs_sk;
	__u32 rs_bound_addr;
	__u16 rs_bound_port;
	int rs_congested;
	int rs_recverr;
	u64 rs_cong_mask;
};

struct sockaddr_in {
	__u16 sin_family;
	__u16 sin_port;
	__u32 sin_addr;
	__u8 sin_zero[8];
};

#endif
