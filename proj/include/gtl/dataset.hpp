#pragma once

#include <cstddef>
#include <vector>

#include "gtl/numerics.hpp"

namespace gtl {

struct Split {
    std::vector<Vector> inputs;
    std::vector<std::size_t> labels;

    std::size_t size() const noexcept { return inputs.size(); }
};

// Labelled classification data with a fixed train/test partition.
struct Dataset {
    Split train;
    Split test;
    std::size_t n_classes = 0;

    std::size_t dim() const { return train.inputs.empty() ? 0 : train.inputs.front().dim(); }
    // Throws if inputs and labels are misaligned, a label is out of range,
    // or dimensions differ.
    void validate() const;
};

// One column per sample.
Matrix batch_inputs(const Split& split, std::size_t first, std::size_t count);
Matrix batch_inputs(const Split& split, const std::vector<std::size_t>& indices);
// One-hot columns.
Matrix one_hot(const std::vector<std::size_t>& labels, std::size_t n_classes);

}  // namespace gtl
