#include "rsflow/kform.hpp"

namespace rsflow {

IndexTuple::IndexTuple(std::vector<int> axes) : axes_(std::move(axes)) {
    for (std::size_t i = 0; i < axes_.size(); ++i) {
        if (axes_[i] < 0) throw ContractError("IndexTuple: negative axis");
        if (i > 0 && axes_[i] <= axes_[i - 1]) throw ContractError("IndexTuple: axes must be strictly increasing");
    }
}

std::optional<std::pair<IndexTuple, int>> IndexTuple::canonical(std::vector<int> axes) {
    int sign = 1;
    // insertion sort, counting transpositions
    for (std::size_t i = 1; i < axes.size(); ++i)
        for (std::size_t j = i; j > 0 && axes[j - 1] > axes[j]; --j) {
            std::swap(axes[j - 1], axes[j]);
            sign = -sign;
        }
    for (std::size_t i = 1; i < axes.size(); ++i)
        if (axes[i] == axes[i - 1]) return std::nullopt;
    return std::pair{IndexTuple(std::move(axes)), sign};
}

IndexTuple IndexTuple::without_slot(int m) const {
    std::vector<int> r;
    r.reserve(axes_.size() - 1);
    for (std::size_t i = 0; i < axes_.size(); ++i)
        if (static_cast<int>(i) != m) r.push_back(axes_[i]);
    return IndexTuple(std::move(r));
}

std::string IndexTuple::to_string() const {
    std::string s = "(";
    for (std::size_t i = 0; i < axes_.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(axes_[i] + 1);
    }
    return s + ")";
}

std::vector<IndexTuple> all_tuples(int d, int k) {
    std::vector<IndexTuple> out;
    if (k < 0 || k > d) return out;
    std::vector<int> idx(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) idx[static_cast<std::size_t>(i)] = i;
    while (true) {
        out.emplace_back(idx);
        int i = k - 1;
        while (i >= 0 && idx[static_cast<std::size_t>(i)] == d - k + i) --i;
        if (i < 0) break;
        ++idx[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < k; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
    }
    return out;
}

}  // namespace rsflow
