#pragma once

#include "advc/bitstream/container.hpp"
#include "advc/bitstream/huffman.hpp"
#include "advc/bitstream/keyframe_codec.hpp"
#include "advc/bitstream/trajectory_coding.hpp"
