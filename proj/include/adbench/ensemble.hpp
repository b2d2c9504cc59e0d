#pragma once

// Homogeneous bagging ensemble. Member i is fit on an independent bootstrap
// resample (with replacement, size = train size) with seed = base seed + i,
// so parallel and sequential fitting produce identical members. Member
// predictions stay individually retrievable for the SD and CORRELL measures.

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "adbench/dataset.hpp"
#include "adbench/regressor.hpp"
#include "adbench/rng.hpp"
#include "adbench/stats.hpp"

namespace adbench {

class Ensemble {
public:
    // member_seed is base_seed + member_index
    using Factory = std::function<std::unique_ptr<Regressor>(std::uint64_t member_seed)>;

    // bootstrap=false is a test hook: every member sees the full train set.
    void fit(const Dataset& train, int n_members, std::uint64_t seed, const Factory& make,
             bool bootstrap = true) {
        if (n_members < 1) throw InvalidInputError("ensemble needs at least one member");
        members_.clear();
        members_.reserve(static_cast<std::size_t>(n_members));
        bootstrap_seed_ = seed;
        for (int i = 0; i < n_members; ++i) {
            const std::uint64_t member_seed = seed + static_cast<std::uint64_t>(i);
            auto model = make(member_seed);
            if (bootstrap) {
                Rng rng(mix_seed(member_seed, 0xB007));
                model->fit(detail::take_rows(train, rng.bootstrap_indices(train.n_rows())));
            } else {
                model->fit(train);
            }
            members_.push_back(std::move(model));
        }
    }

    void add_member(std::unique_ptr<Regressor> fitted) {
        if (!fitted->is_fitted()) throw NotFittedError("ensemble members must be fitted");
        members_.push_back(std::move(fitted));
    }

    // row i = predictions of member i
    Matrix predict_members(const Matrix& x) const {
        require_members();
        Matrix out(members_.size(), x.rows);
        for (std::size_t i = 0; i < members_.size(); ++i) {
            const auto p = members_[i]->predict(x);
            std::copy(p.begin(), p.end(), out.row(i).begin());
        }
        return out;
    }

    std::vector<double> predict_members_one(std::span<const double> x) const {
        require_members();
        std::vector<double> out(members_.size());
        for (std::size_t i = 0; i < members_.size(); ++i) out[i] = members_[i]->predict_one(x);
        return out;
    }

    // ensemble prediction = (1/n)Σ fᵢ(x), the column mean of predict_members
    std::vector<double> predict(const Matrix& x) const {
        const Matrix m = predict_members(x);
        std::vector<double> avg(x.rows, 0.0);
        for (std::size_t i = 0; i < m.rows; ++i)
            for (std::size_t j = 0; j < m.cols; ++j) avg[j] += m(i, j);
        for (auto& v : avg) v /= static_cast<double>(m.rows);
        return avg;
    }

    std::size_t size() const { return members_.size(); }
    const Regressor& member(std::size_t i) const { return *members_[i]; }
    std::uint64_t bootstrap_seed() const { return bootstrap_seed_; }
    bool is_fitted() const { return !members_.empty(); }

private:
    void require_members() const {
        if (members_.empty()) throw NotFittedError("ensemble: predict before fit");
    }

    std::vector<std::unique_ptr<Regressor>> members_;
    std::uint64_t bootstrap_seed_ = 0;

    friend class ModelWriter;
    friend class ModelReader;
};

}  // namespace adbench
