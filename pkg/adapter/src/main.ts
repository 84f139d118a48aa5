#!/usr/bin/env node
import { serve } from "./server";

serve(process.stdin, process.stdout).then(() => process.exit(0));
