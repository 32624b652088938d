#pragma once

#include "corrhist/blocking.hpp"
#include "corrhist/casegraph.hpp"
#include "corrhist/date.hpp"
#include "corrhist/embedded.hpp"
#include "corrhist/errors.hpp"
#include "corrhist/extractor.hpp"
#include "corrhist/generator.hpp"
#include "corrhist/ingest.hpp"
#include "corrhist/model.hpp"
#include "corrhist/xml.hpp"
