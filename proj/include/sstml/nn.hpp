#ifndef SSTML_NN_HPP
#define SSTML_NN_HPP

#include "sstml/nn/checkpoint.hpp"
#include "sstml/nn/gemm.hpp"
#include "sstml/nn/layers.hpp"
#include "sstml/nn/loss.hpp"
#include "sstml/nn/network.hpp"
#include "sstml/nn/optimizer.hpp"
#include "sstml/nn/tensor.hpp"
#include "sstml/nn/train.hpp"

#endif
