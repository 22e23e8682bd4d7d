#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <string_view>
#include <thread>
#include <vector>

#include "penal/rng.hpp"

namespace penal {

struct RunContext {
    Seed seed;
    unsigned workers = 1;
    // Samples per unit of work; each unit owns the substream keyed by its index, so
    // results do not depend on the worker count.
    std::size_t chunk = 1000;
};

// FNV-1a, used to give each experiment its own stream family.
inline std::uint64_t stream_tag(std::string_view name) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : name) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline unsigned default_workers() { return std::max(1u, std::thread::hardware_concurrency()); }

// Items gathered in unit order.
template <class T>
struct Collected {
    std::vector<T> items;
    void merge(const Collected& o) { items.insert(items.end(), o.items.begin(), o.items.end()); }
};

// Fixed-size array of accumulators merged elementwise.
template <class A>
struct AccArray {
    std::vector<A> v;
    void resize(std::size_t n) {
        if (v.size() < n) v.resize(n);
    }
    A& operator[](std::size_t k) { return v[k]; }
    const A& operator[](std::size_t k) const { return v[k]; }
    void merge(const AccArray& o) {
        resize(o.v.size());
        for (std::size_t k = 0; k < o.v.size(); ++k) v[k].merge(o.v[k]);
    }
};

// fn(RngStream&, begin, end, Acc&) fills one unit; units merge in index order.
template <class Acc, class Fn>
Acc parallel_accumulate(const RunContext& ctx, std::uint64_t tag, std::size_t n, Fn&& fn) {
    const std::size_t chunk = std::max<std::size_t>(1, ctx.chunk);
    const std::size_t units = (n + chunk - 1) / chunk;
    std::vector<Acc> parts(units);
    const RngStream base(ctx.seed, StreamId{tag});
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&]() {
        for (;;) {
            const std::size_t u = next.fetch_add(1);
            if (u >= units) return;
            try {
                RngStream rng = base.substream(u);
                fn(rng, u * chunk, std::min(n, (u + 1) * chunk), parts[u]);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(units);
            }
        }
    };
    const unsigned w = std::max(1u, std::min<unsigned>(ctx.workers, static_cast<unsigned>(std::max<std::size_t>(units, 1))));
    if (w == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(w);
        for (unsigned j = 0; j < w; ++j) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }
    if (failure) std::rethrow_exception(failure);
    Acc total{};
    for (auto& p : parts) total.merge(p);
    return total;
}

}  // namespace penal
