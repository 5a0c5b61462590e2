#pragma once

#include <algorithm>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace jetcal {

// Ordered variable context shared by every polynomial in one computation.
// Polynomials over different contexts never mix; binary operations check
// identity of the table (by content), so a context is fixed once per problem.
class VarTable {
public:
    VarTable() = default;
    explicit VarTable(std::vector<std::string> names) : names_(std::move(names)) {
        for (std::size_t i = 0; i < names_.size(); ++i) {
            for (std::size_t j = i + 1; j < names_.size(); ++j)
                if (names_[i] == names_[j])
                    throw std::invalid_argument("duplicate variable name: " + names_[i]);
        }
    }

    std::size_t size() const { return names_.size(); }
    const std::string& name(std::size_t i) const { return names_.at(i); }
    const std::vector<std::string>& names() const { return names_; }

    // Index of a name; -1 when absent.
    int find(const std::string& n) const {
        auto it = std::find(names_.begin(), names_.end(), n);
        return it == names_.end() ? -1 : static_cast<int>(it - names_.begin());
    }

    int require(const std::string& n) const {
        int i = find(n);
        if (i < 0) throw std::invalid_argument("unknown variable: " + n);
        return i;
    }

    bool operator==(const VarTable& o) const { return names_ == o.names_; }
    bool operator!=(const VarTable& o) const { return !(*this == o); }

private:
    std::vector<std::string> names_;
};

using Vars = std::shared_ptr<const VarTable>;

inline Vars make_vars(std::vector<std::string> names) {
    return std::make_shared<const VarTable>(std::move(names));
}

inline bool same_vars(const Vars& a, const Vars& b) {
    if (a == b) return true;
    if (!a || !b) return false;
    return *a == *b;
}

inline void check_same_vars(const Vars& a, const Vars& b) {
    if (!same_vars(a, b)) throw std::invalid_argument("mixed variable contexts");
}

}  // namespace jetcal
