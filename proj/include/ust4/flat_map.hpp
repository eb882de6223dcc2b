#pragma once

#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ust4/point.hpp"

namespace ust4 {

/// Open-addressing hash map from packed point keys (see pack()) to V.
/// Linear probing with backward-shift deletion; key 0 marks an empty slot.
template <class V>
class FlatMap {
public:
    explicit FlatMap(std::size_t expected = 16) { reset(expected); }

    /// Drop all entries and size the table for `expected` entries.
    void reset(std::size_t expected) {
        std::size_t cap = 16;
        while (cap < 2 * expected + 2) cap <<= 1;
        if (cap != keys_.size()) {
            keys_.assign(cap, 0);
            vals_.assign(cap, V{});
        } else {
            std::fill(keys_.begin(), keys_.end(), 0);
        }
        mask_ = cap - 1;
        shift_ = 64 - log2(cap);
        size_ = 0;
    }

    void clear() { reset(size_); }

    std::size_t size() const { return size_; }
    bool empty() const { return size_ == 0; }

    V* find(std::uint64_t k) {
        std::size_t i = slot(k);
        while (true) {
            std::uint64_t kk = keys_[i];
            if (kk == k) return &vals_[i];
            if (kk == 0) return nullptr;
            i = (i + 1) & mask_;
        }
    }
    const V* find(std::uint64_t k) const { return const_cast<FlatMap*>(this)->find(k); }
    bool contains(std::uint64_t k) const { return find(k) != nullptr; }

    /// Insert or overwrite.
    void set(std::uint64_t k, const V& v) { (*this)[k] = v; }

    /// Reference to the value for k, default-inserting if absent.
    V& operator[](std::uint64_t k) {
        std::size_t i = slot(k);
        while (true) {
            std::uint64_t kk = keys_[i];
            if (kk == k) return vals_[i];
            if (kk == 0) break;
            i = (i + 1) & mask_;
        }
        if (2 * (size_ + 1) > keys_.size()) {
            grow();
            return (*this)[k];
        }
        keys_[i] = k;
        vals_[i] = V{};
        ++size_;
        return vals_[i];
    }

    bool erase(std::uint64_t k) {
        std::size_t i = slot(k);
        while (true) {
            std::uint64_t kk = keys_[i];
            if (kk == 0) return false;
            if (kk == k) break;
            i = (i + 1) & mask_;
        }
        std::size_t j = i;
        while (true) {
            j = (j + 1) & mask_;
            std::uint64_t kj = keys_[j];
            if (kj == 0) break;
            std::size_t home = slot(kj);
            // Move kj back into the hole at i unless its home lies cyclically in (i, j].
            bool in_range = (i <= j) ? (home > i && home <= j) : (home > i || home <= j);
            if (!in_range) {
                keys_[i] = kj;
                vals_[i] = std::move(vals_[j]);
                i = j;
            }
        }
        keys_[i] = 0;
        --size_;
        return true;
    }

    template <class F>
    void for_each(F&& f) const {
        for (std::size_t i = 0; i < keys_.size(); ++i)
            if (keys_[i] != 0) f(keys_[i], vals_[i]);
    }

private:
    static int log2(std::size_t c) {
        int r = 0;
        while ((std::size_t{1} << r) < c) ++r;
        return r;
    }
    std::size_t slot(std::uint64_t k) const {
        return static_cast<std::size_t>((k * 0x9e3779b97f4a7c15ULL) >> shift_);
    }
    void grow() {
        std::vector<std::uint64_t> ok = std::move(keys_);
        std::vector<V> ov = std::move(vals_);
        std::size_t cap = ok.size() * 2;
        keys_.assign(cap, 0);
        vals_.assign(cap, V{});
        mask_ = cap - 1;
        shift_ = 64 - log2(cap);
        size_ = 0;
        for (std::size_t i = 0; i < ok.size(); ++i) {
            if (ok[i] == 0) continue;
            std::size_t s = slot(ok[i]);
            while (keys_[s] != 0) s = (s + 1) & mask_;
            keys_[s] = ok[i];
            vals_[s] = std::move(ov[i]);
            ++size_;
        }
    }

    std::vector<std::uint64_t> keys_;
    std::vector<V> vals_;
    std::size_t mask_ = 0;
    int shift_ = 60;
    std::size_t size_ = 0;
};

/// Set of points keyed by pack().
class PointSet {
public:
    explicit PointSet(std::size_t expected = 16) : map_(expected) {}
    template <class It>
    PointSet(It first, It last) : map_(static_cast<std::size_t>(std::distance(first, last))) {
        for (; first != last; ++first) insert(*first);
    }

    bool insert(const Point& p) {
        check(p);
        std::uint64_t k = pack(p);
        if (map_.contains(k)) return false;
        map_[k] = 1;
        return true;
    }
    bool contains(const Point& p) const { return packable(p) && map_.contains(pack(p)); }
    bool contains_key(std::uint64_t k) const { return map_.contains(k); }
    bool erase(const Point& p) { return packable(p) && map_.erase(pack(p)); }
    std::size_t size() const { return map_.size(); }
    bool empty() const { return map_.empty(); }
    void reset(std::size_t expected) { map_.reset(expected); }

    std::vector<Point> points() const {
        std::vector<Point> out;
        map_.for_each([&](std::uint64_t k, char) { out.push_back(unpack(k)); });
        return out;
    }

private:
    static void check(const Point& p) {
        if (!packable(p)) throw std::out_of_range("point outside packable range: " + to_string(p));
    }
    FlatMap<char> map_;
};

}  // namespace ust4
