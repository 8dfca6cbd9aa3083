// Copyright 2026 The relit Authors
// SPDX-License-Identifier: Apache-2.0
#include "relit/train/data.hpp"

#include <numeric>

#include "relit/core/error.hpp"
#include "relit/gen3d/generator.hpp"

namespace relit::train {

ImageBank::ImageBank(const stage::Dataset& dataset, std::vector<int> subjects, std::vector<std::string> envs)
    : subjects_(std::move(subjects)), envs_(std::move(envs)), poses_(dataset.cameras()) {
    const int res = dataset.config().resolution;
    const auto S = static_cast<std::int64_t>(subjects_.size()), E = static_cast<std::int64_t>(envs_.size()),
               C = static_cast<std::int64_t>(poses_.size());
    images_ = torch::empty({S, E, C, 3, res, res});
    for (std::int64_t s = 0; s < S; ++s)
        for (std::int64_t e = 0; e < E; ++e)
            for (std::int64_t c = 0; c < C; ++c)
                images_[s][e][c].copy_(gen3d::from_image(dataset.relit(subjects_[static_cast<std::size_t>(s)],
                                                                       envs_[static_cast<std::size_t>(e)],
                                                                       static_cast<int>(c)))[0]);
    for (const auto& env : envs_) weights_.push_back(dataset.weights(env));
    for (int s : subjects_) subjects_data_.push_back(dataset.subject(s));
}

torch::Tensor ImageBank::image(int subject_slot, int env_slot, int camera) const {
    return images_[subject_slot][env_slot][camera];
}

torch::Tensor ImageBank::gather(std::span<const int> s, std::span<const int> e, std::span<const int> c) const {
    if (s.size() != e.size() || s.size() != c.size()) throw Error("ImageBank::gather: index spans differ in length");
    std::vector<torch::Tensor> rows;
    for (std::size_t i = 0; i < s.size(); ++i) rows.push_back(image(s[i], e[i], c[i]));
    return torch::stack(rows);
}

std::vector<std::size_t> permutation(std::size_t n, SplitMix64& rng) {
    std::vector<std::size_t> p(n);
    std::iota(p.begin(), p.end(), 0);
    for (std::size_t i = n; i > 1; --i) std::swap(p[i - 1], p[rng.below(i)]);
    return p;
}

PairSampler::PairSampler(int subjects, std::vector<int> cameras, int envs, std::uint64_t seed) : rng_(seed) {
    if (subjects < 1 || cameras.empty() || envs < 1) throw Error("PairSampler: empty sampling domain");
    for (int s = 0; s < subjects; ++s)
        for (int c : cameras)
            for (int a = 0; a < envs; ++a)
                for (int b = 0; b < envs; ++b) all_.push_back({s, c, a, b});
    reshuffle();
    epoch_ = 0;
}

void PairSampler::reshuffle() {
    order_ = permutation(all_.size(), rng_);
    cursor_ = 0;
    ++epoch_;
}

std::vector<PairIndex> PairSampler::next_batch(int batch) {
    std::vector<PairIndex> out;
    for (int i = 0; i < batch; ++i) {
        if (cursor_ == order_.size()) reshuffle();
        out.push_back(all_[order_[cursor_++]]);
    }
    return out;
}

}  // namespace relit::train
