#include "ring.h"

#define STATS_INTERVAL 16

static struct ring_stats global_stats;

void stats_account_push(int dropped)
{
	global_stats.pushes++;
	if (dropped)
		global_stats.drops++;
}

void stats_account_pop(void)
{
	global_stats.pops++;
}
