#pragma once

#include <condition_variable>
#include <cstddef>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace twinflow::util {

/// Persistent pool for per-step fan-out. parallel_for blocks until all chunks
/// ran; with one worker it degenerates to an inline loop so single-threaded
/// runs carry no synchronization cost.
class ThreadPool {
public:
    explicit ThreadPool(std::size_t workers) : worker_count_(workers == 0 ? 1 : workers) {
        for (std::size_t w = 1; w < worker_count_; ++w) {
            threads_.emplace_back([this, w] { worker_loop(w); });
        }
    }

    ThreadPool(const ThreadPool&) = delete;
    ThreadPool& operator=(const ThreadPool&) = delete;

    ~ThreadPool() {
        {
            std::lock_guard lock(mutex_);
            stop_ = true;
            ++generation_;
        }
        start_cv_.notify_all();
        for (auto& t : threads_) t.join();
    }

    std::size_t workers() const { return worker_count_; }

    /// Runs body(begin, end) over [0, n) split into one contiguous chunk per
    /// worker. Chunk boundaries depend only on (n, workers), never on
    /// scheduling, so any writes indexed by position are reproducible.
    void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body) {
        if (n == 0) return;
        if (worker_count_ == 1 || n == 1) {
            body(0, n);
            return;
        }
        {
            std::lock_guard lock(mutex_);
            job_ = &body;
            job_n_ = n;
            pending_ = worker_count_ - 1;
            ++generation_;
        }
        start_cv_.notify_all();
        run_chunk(0, body, n);
        std::unique_lock lock(mutex_);
        done_cv_.wait(lock, [this] { return pending_ == 0; });
        job_ = nullptr;
    }

private:
    void run_chunk(std::size_t w, const std::function<void(std::size_t, std::size_t)>& body,
                   std::size_t n) const {
        const std::size_t per = (n + worker_count_ - 1) / worker_count_;
        const std::size_t begin = w * per;
        const std::size_t end = std::min(n, begin + per);
        if (begin < end) body(begin, end);
    }

    void worker_loop(std::size_t w) {
        std::uint64_t seen = 0;
        for (;;) {
            const std::function<void(std::size_t, std::size_t)>* job = nullptr;
            std::size_t n = 0;
            {
                std::unique_lock lock(mutex_);
                start_cv_.wait(lock, [&] { return generation_ != seen; });
                seen = generation_;
                if (stop_) return;
                job = job_;
                n = job_n_;
            }
            if (job) run_chunk(w, *job, n);
            {
                std::lock_guard lock(mutex_);
                if (--pending_ == 0) done_cv_.notify_one();
            }
        }
    }

    std::size_t worker_count_;
    std::vector<std::thread> threads_;
    std::mutex mutex_;
    std::condition_variable start_cv_;
    std::condition_variable done_cv_;
    const std::function<void(std::size_t, std::size_t)>* job_ = nullptr;
    std::size_t job_n_ = 0;
    std::size_t pending_ = 0;
    std::uint64_t generation_ = 0;
    bool stop_ = false;
};

}  // namespace twinflow::util
