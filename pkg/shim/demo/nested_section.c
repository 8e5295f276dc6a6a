/* A lock section that spans threads: main holds m1 while it forks and joins
 * a thread whose only work is an m2 section.  Every schedule therefore puts
 * the third thread's events inside main's m1 section, which the per-thread
 * lock set construction cannot see.
 *
 * Main leaves via pthread_exit so the first worker finishes on its own time
 * without a join ever appearing in main's recorded column.
 */
#include <pthread.h>

static pthread_mutex_t m1 = PTHREAD_MUTEX_INITIALIZER;
static pthread_mutex_t m2 = PTHREAD_MUTEX_INITIALIZER;

static void *nested_pair(void *arg)
{
    (void)arg;
    pthread_mutex_lock(&m1);
    pthread_mutex_lock(&m2);
    pthread_mutex_unlock(&m2);
    pthread_mutex_unlock(&m1);
    return 0;
}

static void *inner_section(void *arg)
{
    (void)arg;
    pthread_mutex_lock(&m2);
    pthread_mutex_unlock(&m2);
    return 0;
}

int main(void)
{
    pthread_t t2, t3;
    pthread_create(&t2, 0, nested_pair, 0);
    pthread_mutex_lock(&m1);
    pthread_create(&t3, 0, inner_section, 0);
    pthread_join(t3, 0);
    pthread_mutex_unlock(&m1);
    pthread_exit(0);
}
