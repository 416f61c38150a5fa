#pragma once

#include "bench.hpp"
#include "bits.hpp"
#include "collection.hpp"
#include "error.hpp"
#include "index_file.hpp"
#include "pc_ef_list.hpp"
#include "reference.hpp"
#include "representation.hpp"
#include "roaring_lite.hpp"
#include "sequence.hpp"
#include "set_algebra.hpp"
#include "sliced_set.hpp"
#include "small_array.hpp"
