#include "silt/parallel.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace silt {

namespace {

unsigned initial_thread_count()
{
    if (const char* env = std::getenv("SILT_THREADS")) {
        try {
            const long v = std::stol(env);
            if (v > 0) return static_cast<unsigned>(v);
        } catch (const std::exception&) {
        }
    }
    return 1;
}

std::atomic<unsigned>& thread_setting()
{
    static std::atomic<unsigned> n{initial_thread_count()};
    return n;
}

struct Compensated {
    double sum = 0.0;
    double carry = 0.0;

    void add(double x)
    {
        const double t = sum + x;
        if (std::fabs(sum) >= std::fabs(x))
            carry += (sum - t) + x;
        else
            carry += (x - t) + sum;
        sum = t;
    }
    void add(const Compensated& o)
    {
        add(o.sum);
        carry += o.carry;
    }
    double value() const { return sum + carry; }
};

Compensated tree_sum_impl(std::span<const double> v)
{
    Compensated acc;
    if (v.size() <= 16) {
        for (double x : v) acc.add(x);
        return acc;
    }
    const std::size_t half = v.size() / 2;
    acc = tree_sum_impl(v.first(half));
    acc.add(tree_sum_impl(v.subspan(half)));
    return acc;
}

}  // namespace

unsigned thread_count() { return thread_setting().load(); }

void set_thread_count(unsigned n) { thread_setting().store(n == 0 ? 1 : n); }

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body)
{
    const unsigned workers = std::min<std::size_t>(thread_count(), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = n;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

double tree_sum(std::span<const double> values) { return tree_sum_impl(values).value(); }

}  // namespace silt
