#include "support/parallel.hpp"

#include <condition_variable>
#include <cstdlib>
#include <mutex>
#include <thread>
#include <vector>

namespace gcrp {
namespace {

class Pool {
public:
    explicit Pool(int n) { start(n); }

    ~Pool() { stop(); }

    int size() const { return static_cast<int>(workers_.size()) + 1; }

    void resize(int n) {
        stop();
        start(n);
    }

    void run(int64_t n, const std::function<void(int64_t, int64_t)>& fn) {
        const int threads = size();
        if (threads == 1 || n == 1) {
            fn(0, n);
            return;
        }
        // Static split: thread t owns [t*chunk, min((t+1)*chunk, n)).
        const int64_t chunk = (n + threads - 1) / threads;
        {
            std::lock_guard<std::mutex> lock(mu_);
            job_ = &fn;
            job_n_ = n;
            job_chunk_ = chunk;
            pending_ = static_cast<int>(workers_.size());
            ++generation_;
        }
        cv_start_.notify_all();
        fn(0, std::min(chunk, n));
        std::unique_lock<std::mutex> lock(mu_);
        cv_done_.wait(lock, [this] { return pending_ == 0; });
        job_ = nullptr;
    }

private:
    void start(int n) {
        stopping_ = false;
        for (int t = 1; t < n; ++t) {
            workers_.emplace_back([this, t] { worker_loop(t); });
        }
    }

    void stop() {
        {
            std::lock_guard<std::mutex> lock(mu_);
            stopping_ = true;
            ++generation_;
        }
        cv_start_.notify_all();
        for (auto& w : workers_) w.join();
        workers_.clear();
    }

    void worker_loop(int id) {
        uint64_t seen = 0;
        for (;;) {
            const std::function<void(int64_t, int64_t)>* job = nullptr;
            int64_t n = 0;
            int64_t chunk = 0;
            {
                std::unique_lock<std::mutex> lock(mu_);
                cv_start_.wait(lock, [&] { return generation_ != seen; });
                seen = generation_;
                if (stopping_) return;
                job = job_;
                n = job_n_;
                chunk = job_chunk_;
            }
            const int64_t begin = std::min<int64_t>(id * chunk, n);
            const int64_t end = std::min<int64_t>(begin + chunk, n);
            if (begin < end) (*job)(begin, end);
            {
                std::lock_guard<std::mutex> lock(mu_);
                --pending_;
            }
            cv_done_.notify_one();
        }
    }

    std::vector<std::thread> workers_;
    std::mutex mu_;
    std::condition_variable cv_start_;
    std::condition_variable cv_done_;
    const std::function<void(int64_t, int64_t)>* job_ = nullptr;
    int64_t job_n_ = 0;
    int64_t job_chunk_ = 0;
    int pending_ = 0;
    uint64_t generation_ = 0;
    bool stopping_ = false;
};

int initial_threads() {
    if (const char* env = std::getenv("GCRP_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? static_cast<int>(hw) : 1;
}

Pool& pool() {
    static Pool p(initial_threads());
    return p;
}

}  // namespace

int thread_count() { return pool().size(); }

void set_thread_count(int n) { pool().resize(n < 1 ? 1 : n); }

void parallel_for(int64_t n, const std::function<void(int64_t, int64_t)>& fn) {
    if (n <= 0) return;
    pool().run(n, fn);
}

}  // namespace gcrp
