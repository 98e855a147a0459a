#ifndef _FIX_LINUX_NET_H
#define _FIX_LINUX_NET_H

#include <linux/types.h>

#define AF_RDS 21
#define PF_RDS AF_RDS

#define SOCK_STREAM 1
#define SOCK_DGRAM 2
#define SOCK_SEQPACKET 5

struct socket;
struct sockaddr;
struct msghdr;

struct proto_ops {
	int		family;
	struct module	*owner;
	int		(*release)(struct socket *sock);
	int		(*bind)(struct socket *sock, struct sockaddr *myaddr,
				int sockaddr_len);
	int		(*connect)(struct socket *sock, struct sockaddr *vaddr,
				   int sockaddr_len, int flags);
	int		(*getname)(struct socket *sock, struct sockaddr *addr,
				   int peer);
	int		(*setsockopt)(struct socket *sock, int level,
				      int optname, char __user *optval,
				      unsigned int optlen);
	int		(*getsockopt)(struct socket *sock, int level,
				      int optname, char __user *optval,
				      int __user *optlen);
	int		(*sendmsg)(struct socket *sock, struct msghdr *m,
				   size_t total_len);
	int		(*recvmsg)(struct socket *sock, struct msghdr *m,
				   size_t total_len, int flags);
};

struct net_proto_family {
	int		family;
	int		(*create)(struct net *net, struct socket *sock,
				  int protocol, int kern);
	struct module	*owner;
};

struct socket {
	unsigned long		flags;
	struct file		*file;
	struct sock		*sk;
	const struct proto_ops	*ops;
};

#endif
