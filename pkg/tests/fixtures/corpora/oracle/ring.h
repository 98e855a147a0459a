#ifndef ORACLE_RING_H
#define ORACLE_RING_H

#define RING_DEFAULT_SIZE 64
#define RING_MAX_SIZE 4096

enum ring_state {
	RING_EMPTY,
	RING_PARTIAL,
	RING_FULL,
};

struct ring {
	unsigned int head;
	unsigned int tail;
	unsigned int size;
	int slots[RING_MAX_SIZE];
};

struct ring_stats {
	unsigned long pushes;
	unsigned long pops;
	unsigned long drops;
};

int ring_push(struct ring *r, int value);
int ring_pop(struct ring *r, int *value);

#endif
