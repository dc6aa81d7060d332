#include "mixlab/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

namespace mixlab::kern {

#if MIXLAB_HAVE_AVX2_TU
const Ops* avx2_ops_impl(); // defined in kernels_avx2.cpp
#endif

const Ops* avx2_ops() {
#if MIXLAB_HAVE_AVX2_TU
    if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma"))
        return avx2_ops_impl();
#endif
    return nullptr;
}

namespace {

std::atomic<const Ops*> g_active{nullptr};

const Ops* pick_auto() {
    if (const Ops* t = avx2_ops()) return t;
    return &scalar_ops();
}

const Ops* initial_table() {
    if (const char* env = std::getenv("MIXLAB_KERNELS")) {
        if (std::strcmp(env, "scalar") == 0) return &scalar_ops();
        if (std::strcmp(env, "avx2") == 0) {
            if (const Ops* t = avx2_ops()) return t;
            // requested variant unavailable: fall through to auto
        }
    }
    return pick_auto();
}

} // namespace

const Ops& ops() {
    const Ops* t = g_active.load(std::memory_order_acquire);
    if (!t) {
        t = initial_table();
        g_active.store(t, std::memory_order_release);
    }
    return *t;
}

bool select(const char* name) {
    if (std::strcmp(name, "auto") == 0) {
        g_active.store(pick_auto(), std::memory_order_release);
        return true;
    }
    if (std::strcmp(name, "scalar") == 0) {
        g_active.store(&scalar_ops(), std::memory_order_release);
        return true;
    }
    if (std::strcmp(name, "avx2") == 0) {
        if (const Ops* t = avx2_ops()) {
            g_active.store(t, std::memory_order_release);
            return true;
        }
        return false;
    }
    return false;
}

} // namespace mixlab::kern
