#ifndef _FIX_LINUX_COMPILER_H
#define _FIX_LINUX_COMPILER_H

#define __user
#define __init
#define __exit
#define __must_check
#define likely(x) (x)
#define unlikely(x) (x)

#endif
