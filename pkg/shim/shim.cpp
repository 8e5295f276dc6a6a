// Runtime interposition library: records fork/join/lock/unlock events from
// pthread programs into the locktrace text format.
//
// Build as a shared library and load it with LD_PRELOAD; the environment
// variable LOCKTRACE_OUT names the output file (unset = record nothing).
//
// Ordering guarantees, so that every capture is itself a well-formed trace:
//   - fork lines are written before the thread is created, so they precede
//     any event of the child;
//   - lock lines are written after the acquisition succeeds (while holding);
//   - unlock lines are written before the release, so no later acquirer can
//     overtake them in the file;
//   - join lines are written after the wait returns, hence after every line
//     the joined thread ever wrote.
//
// The shim's own synchronization is a spinlock: it must never call the
// pthread functions it intercepts.

#define _GNU_SOURCE 1

#include <dlfcn.h>
#include <pthread.h>
#include <sys/syscall.h>
#include <unistd.h>

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <unordered_map>

namespace {

using mutex_fn = int (*)(pthread_mutex_t *);
using create_fn = int (*)(pthread_t *, const pthread_attr_t *, void *(*)(void *), void *);
using join_fn = int (*)(pthread_t, void **);

mutex_fn real_lock;
mutex_fn real_trylock;
mutex_fn real_unlock;
create_fn real_create;
join_fn real_join;

std::atomic<bool> g_ready{false};
std::atomic_flag g_spin = ATOMIC_FLAG_INIT;
FILE *g_out;
unsigned g_next_thread = 2;
unsigned g_next_mutex = 1;

// Heap-allocated so no destructor runs while late threads still emit.
std::unordered_map<const pthread_mutex_t *, unsigned> *g_mutex_names;
std::unordered_map<pthread_t, unsigned> *g_thread_numbers;

thread_local unsigned t_self;

struct SpinGuard {
    SpinGuard() {
        while (g_spin.test_and_set(std::memory_order_acquire)) {
        }
    }
    ~SpinGuard() { g_spin.clear(std::memory_order_release); }
};

void init() {
    if (g_ready.load(std::memory_order_acquire))
        return;
    SpinGuard guard;
    if (g_ready.load(std::memory_order_relaxed))
        return;
    real_lock = reinterpret_cast<mutex_fn>(dlsym(RTLD_NEXT, "pthread_mutex_lock"));
    real_trylock = reinterpret_cast<mutex_fn>(dlsym(RTLD_NEXT, "pthread_mutex_trylock"));
    real_unlock = reinterpret_cast<mutex_fn>(dlsym(RTLD_NEXT, "pthread_mutex_unlock"));
    real_create = reinterpret_cast<create_fn>(dlsym(RTLD_NEXT, "pthread_create"));
    real_join = reinterpret_cast<join_fn>(dlsym(RTLD_NEXT, "pthread_join"));
    g_mutex_names = new std::unordered_map<const pthread_mutex_t *, unsigned>();
    g_thread_numbers = new std::unordered_map<pthread_t, unsigned>();
    const char *path = getenv("LOCKTRACE_OUT");
    if (path != nullptr && path[0] != '\0')
        g_out = fopen(path, "w");
    g_ready.store(true, std::memory_order_release);
}

__attribute__((constructor)) void setup() {
    init();
    t_self = 1;  // the loading thread is the main thread
}

unsigned self_number() {
    if (t_self == 0) {
        if (syscall(SYS_gettid) == getpid()) {
            t_self = 1;  // main thread, seen before the constructor ran
        } else {
            // A thread we never saw being created; number it so the record
            // at least names distinct threads, and say so.
            SpinGuard guard;
            t_self = g_next_thread++;
            fprintf(stderr,
                    "locktrace-shim: thread without a recorded fork, numbered %u\n",
                    t_self);
        }
    }
    return t_self;
}

// All writes go through the spinlock; the file position is the global
// sequence number.
void emit_locked(unsigned thread, const char *fmt, unsigned arg) {
    if (g_out == nullptr)
        return;
    fprintf(g_out, "%u, ", thread);
    fprintf(g_out, fmt, arg);
    fputc('\n', g_out);
    fflush(g_out);
}

unsigned mutex_number_locked(const pthread_mutex_t *m) {
    auto it = g_mutex_names->find(m);
    if (it != g_mutex_names->end())
        return it->second;
    unsigned number = g_next_mutex++;
    g_mutex_names->emplace(m, number);
    return number;
}

struct Launch {
    void *(*routine)(void *);
    void *argument;
    unsigned number;
};

void *trampoline(void *raw) {
    Launch launch = *static_cast<Launch *>(raw);
    free(raw);
    t_self = launch.number;
    return launch.routine(launch.argument);
}

}  // namespace

extern "C" {

int pthread_mutex_lock(pthread_mutex_t *m) {
    init();
    int rc = real_lock(m);
    if (rc == 0 && g_out != nullptr) {
        unsigned self = self_number();
        SpinGuard guard;
        emit_locked(self, "lock(m%u)", mutex_number_locked(m));
    }
    return rc;
}

int pthread_mutex_trylock(pthread_mutex_t *m) {
    init();
    int rc = real_trylock(m);
    // a failed attempt acquires nothing and is not an event
    if (rc == 0 && g_out != nullptr) {
        unsigned self = self_number();
        SpinGuard guard;
        emit_locked(self, "lock(m%u)", mutex_number_locked(m));
    }
    return rc;
}

int pthread_mutex_unlock(pthread_mutex_t *m) {
    init();
    if (g_out != nullptr) {
        unsigned self = self_number();
        SpinGuard guard;
        emit_locked(self, "unlock(m%u)", mutex_number_locked(m));
    }
    return real_unlock(m);
}

int pthread_create(pthread_t *thread, const pthread_attr_t *attr,
                   void *(*routine)(void *), void *argument) {
    init();
    if (g_out == nullptr)
        return real_create(thread, attr, routine, argument);
    Launch *launch = static_cast<Launch *>(malloc(sizeof(Launch)));
    launch->routine = routine;
    launch->argument = argument;
    unsigned self = self_number();
    unsigned number;
    {
        SpinGuard guard;
        number = g_next_thread++;
        // written before the child exists, so it precedes every child event
        emit_locked(self, "fork(%u)", number);
    }
    launch->number = number;
    // the child owns (and frees) the launch block from here on
    int rc = real_create(thread, attr, trampoline, launch);
    if (rc == 0) {
        SpinGuard guard;
        g_thread_numbers->emplace(*thread, number);
    } else {
        free(launch);
    }
    return rc;
}

int pthread_join(pthread_t thread, void **result) {
    init();
    if (g_out == nullptr)
        return real_join(thread, result);
    int rc = real_join(thread, result);
    if (rc == 0) {
        unsigned self = self_number();
        SpinGuard guard;
        auto it = g_thread_numbers->find(thread);
        if (it != g_thread_numbers->end()) {
            emit_locked(self, "join(%u)", it->second);
            g_thread_numbers->erase(it);  // pthread_t values can be reused
        }
    }
    return rc;
}

}  // extern "C"
