/* @ts-self-types="./bekkshrink_wasm.d.ts" */

export class EsdComparison {
    static __wrap(ptr) {
        const obj = Object.create(EsdComparison.prototype);
        obj.__wbg_ptr = ptr;
        EsdComparisonFinalization.register(obj, obj.__wbg_ptr, obj);
        return obj;
    }
    __destroy_into_raw() {
        const ptr = this.__wbg_ptr;
        this.__wbg_ptr = 0;
        EsdComparisonFinalization.unregister(this);
        return ptr;
    }
    free() {
        const ptr = this.__destroy_into_raw();
        wasm.__wbg_esdcomparison_free(ptr, 0);
    }
    /**
     * @returns {number}
     */
    get a_hat() {
        const ret = wasm.esdcomparison_a_hat(this.__wbg_ptr);
        return ret;
    }
    /**
     * @returns {Float64Array}
     */
    adjusted() {
        const ret = wasm.esdcomparison_adjusted(this.__wbg_ptr);
        var v1 = getArrayF64FromWasm0(ret[0], ret[1]).slice();
        wasm.__wbindgen_free(ret[0], ret[1] * 8, 8);
        return v1;
    }
    /**
     * @returns {number}
     */
    get b_hat() {
        const ret = wasm.esdcomparison_b_hat(this.__wbg_ptr);
        return ret;
    }
    /**
     * @returns {Float64Array}
     */
    iid() {
        const ret = wasm.esdcomparison_iid(this.__wbg_ptr);
        var v1 = getArrayF64FromWasm0(ret[0], ret[1]).slice();
        wasm.__wbindgen_free(ret[0], ret[1] * 8, 8);
        return v1;
    }
    /**
     * @returns {Float64Array}
     */
    raw() {
        const ret = wasm.esdcomparison_raw(this.__wbg_ptr);
        var v1 = getArrayF64FromWasm0(ret[0], ret[1]).slice();
        wasm.__wbindgen_free(ret[0], ret[1] * 8, 8);
        return v1;
    }
    /**
     * @returns {number}
     */
    get raw_dist() {
        const ret = wasm.esdcomparison_raw_dist(this.__wbg_ptr);
        return ret;
    }
    /**
     * @returns {number}
     */
    get tv_dist() {
        const ret = wasm.esdcomparison_tv_dist(this.__wbg_ptr);
        return ret;
    }
}
if (Symbol.dispose) EsdComparison.prototype[Symbol.dispose] = EsdComparison.prototype.free;

export class MpCurve {
    static __wrap(ptr) {
        const obj = Object.create(MpCurve.prototype);
        obj.__wbg_ptr = ptr;
        MpCurveFinalization.register(obj, obj.__wbg_ptr, obj);
        return obj;
    }
    __destroy_into_raw() {
        const ptr = this.__wbg_ptr;
        this.__wbg_ptr = 0;
        MpCurveFinalization.unregister(this);
        return ptr;
    }
    free() {
        const ptr = this.__destroy_into_raw();
        wasm.__wbg_mpcurve_free(ptr, 0);
    }
    /**
     * @returns {Float64Array}
     */
    density() {
        const ret = wasm.mpcurve_density(this.__wbg_ptr);
        var v1 = getArrayF64FromWasm0(ret[0], ret[1]).slice();
        wasm.__wbindgen_free(ret[0], ret[1] * 8, 8);
        return v1;
    }
    /**
     * Support intervals as `[left0, right0, left1, right1, ...]`.
     * @returns {Float64Array}
     */
    edges() {
        const ret = wasm.mpcurve_edges(this.__wbg_ptr);
        var v1 = getArrayF64FromWasm0(ret[0], ret[1]).slice();
        wasm.__wbindgen_free(ret[0], ret[1] * 8, 8);
        return v1;
    }
    /**
     * @returns {Float64Array}
     */
    x() {
        const ret = wasm.mpcurve_x(this.__wbg_ptr);
        var v1 = getArrayF64FromWasm0(ret[0], ret[1]).slice();
        wasm.__wbindgen_free(ret[0], ret[1] * 8, 8);
        return v1;
    }
    /**
     * @returns {number}
     */
    get zero_mass() {
        const ret = wasm.mpcurve_zero_mass(this.__wbg_ptr);
        return ret;
    }
}
if (Symbol.dispose) MpCurve.prototype[Symbol.dispose] = MpCurve.prototype.free;

export class ShrinkDemo {
    static __wrap(ptr) {
        const obj = Object.create(ShrinkDemo.prototype);
        obj.__wbg_ptr = ptr;
        ShrinkDemoFinalization.register(obj, obj.__wbg_ptr, obj);
        return obj;
    }
    __destroy_into_raw() {
        const ptr = this.__wbg_ptr;
        this.__wbg_ptr = 0;
        ShrinkDemoFinalization.unregister(this);
        return ptr;
    }
    free() {
        const ptr = this.__destroy_into_raw();
        wasm.__wbg_shrinkdemo_free(ptr, 0);
    }
    /**
     * @returns {number}
     */
    get raw_frob() {
        const ret = wasm.shrinkdemo_raw_frob(this.__wbg_ptr);
        return ret;
    }
    /**
     * @returns {Float64Array}
     */
    raw_spectrum() {
        const ret = wasm.shrinkdemo_raw_spectrum(this.__wbg_ptr);
        var v1 = getArrayF64FromWasm0(ret[0], ret[1]).slice();
        wasm.__wbindgen_free(ret[0], ret[1] * 8, 8);
        return v1;
    }
    /**
     * @returns {number}
     */
    get sample_frob() {
        const ret = wasm.shrinkdemo_sample_frob(this.__wbg_ptr);
        return ret;
    }
    /**
     * @returns {Float64Array}
     */
    truth() {
        const ret = wasm.shrinkdemo_truth(this.__wbg_ptr);
        var v1 = getArrayF64FromWasm0(ret[0], ret[1]).slice();
        wasm.__wbindgen_free(ret[0], ret[1] * 8, 8);
        return v1;
    }
    /**
     * @returns {number}
     */
    get tv_frob() {
        const ret = wasm.shrinkdemo_tv_frob(this.__wbg_ptr);
        return ret;
    }
    /**
     * @returns {Float64Array}
     */
    tv_spectrum() {
        const ret = wasm.shrinkdemo_tv_spectrum(this.__wbg_ptr);
        var v1 = getArrayF64FromWasm0(ret[0], ret[1]).slice();
        wasm.__wbindgen_free(ret[0], ret[1] * 8, 8);
        return v1;
    }
}
if (Symbol.dispose) ShrinkDemo.prototype[Symbol.dispose] = ShrinkDemo.prototype.free;

/**
 * Sorted eigenvalues of the raw, adjusted and paired i.i.d. sample
 * covariances of one simulated panel.
 * @param {number} p
 * @param {number} n
 * @param {number} a
 * @param {number} b
 * @param {number} rho
 * @param {bigint} seed
 * @param {boolean} estimate_ab
 * @returns {EsdComparison}
 */
export function compare_esd(p, n, a, b, rho, seed, estimate_ab) {
    const ret = wasm.compare_esd(p, n, a, b, rho, seed, estimate_ab);
    if (ret[2]) {
        throw takeFromExternrefTable0(ret[1]);
    }
    return EsdComparison.__wrap(ret[0]);
}

/**
 * Density of the limiting law for `H = w δ(t1) + (1 - w) δ(t2)` at
 * concentration `y`, on `points` grid points spanning the support.
 * @param {number} y
 * @param {number} t1
 * @param {number} t2
 * @param {number} w
 * @param {number} points
 * @returns {MpCurve}
 */
export function mp_density(y, t1, t2, w, points) {
    const ret = wasm.mp_density(y, t1, t2, w, points);
    if (ret[2]) {
        throw takeFromExternrefTable0(ret[1]);
    }
    return MpCurve.__wrap(ret[0]);
}

/**
 * Spectrum estimates (ascending) and Frobenius errors of nonlinear
 * shrinkage applied to the raw and the adjusted sample covariance.
 * @param {number} p
 * @param {number} n
 * @param {number} a
 * @param {number} b
 * @param {number} rho
 * @param {bigint} seed
 * @param {boolean} estimate_ab
 * @returns {ShrinkDemo}
 */
export function shrink(p, n, a, b, rho, seed, estimate_ab) {
    const ret = wasm.shrink(p, n, a, b, rho, seed, estimate_ab);
    if (ret[2]) {
        throw takeFromExternrefTable0(ret[1]);
    }
    return ShrinkDemo.__wrap(ret[0]);
}
function __wbg_get_imports() {
    const import0 = {
        __proto__: null,
        __wbg_Error_30c8987f7c2ed4e2: function(arg0, arg1) {
            const ret = Error(getStringFromWasm0(arg0, arg1));
            return ret;
        },
        __wbg___wbindgen_throw_41e9ee4f547fc59a: function(arg0, arg1) {
            throw new Error(getStringFromWasm0(arg0, arg1));
        },
        __wbindgen_init_externref_table: function() {
            const table = wasm.__wbindgen_externrefs;
            const offset = table.grow(4);
            table.set(0, undefined);
            table.set(offset + 0, undefined);
            table.set(offset + 1, null);
            table.set(offset + 2, true);
            table.set(offset + 3, false);
        },
    };
    return {
        __proto__: null,
        "./bekkshrink_wasm_bg.js": import0,
    };
}

const EsdComparisonFinalization = (typeof FinalizationRegistry === 'undefined')
    ? { register: () => {}, unregister: () => {} }
    : new FinalizationRegistry(ptr => wasm.__wbg_esdcomparison_free(ptr, 1));
const MpCurveFinalization = (typeof FinalizationRegistry === 'undefined')
    ? { register: () => {}, unregister: () => {} }
    : new FinalizationRegistry(ptr => wasm.__wbg_mpcurve_free(ptr, 1));
const ShrinkDemoFinalization = (typeof FinalizationRegistry === 'undefined')
    ? { register: () => {}, unregister: () => {} }
    : new FinalizationRegistry(ptr => wasm.__wbg_shrinkdemo_free(ptr, 1));

function getArrayF64FromWasm0(ptr, len) {
    ptr = ptr >>> 0;
    return getFloat64ArrayMemory0().subarray(ptr / 8, ptr / 8 + len);
}

let cachedFloat64ArrayMemory0 = null;
function getFloat64ArrayMemory0() {
    if (cachedFloat64ArrayMemory0 === null || cachedFloat64ArrayMemory0.byteLength === 0) {
        cachedFloat64ArrayMemory0 = new Float64Array(wasm.memory.buffer);
    }
    return cachedFloat64ArrayMemory0;
}

function getStringFromWasm0(ptr, len) {
    return decodeText(ptr >>> 0, len);
}

let cachedUint8ArrayMemory0 = null;
function getUint8ArrayMemory0() {
    if (cachedUint8ArrayMemory0 === null || cachedUint8ArrayMemory0.byteLength === 0) {
        cachedUint8ArrayMemory0 = new Uint8Array(wasm.memory.buffer);
    }
    return cachedUint8ArrayMemory0;
}

function takeFromExternrefTable0(idx) {
    const value = wasm.__wbindgen_externrefs.get(idx);
    wasm.__externref_table_dealloc(idx);
    return value;
}

let cachedTextDecoder = new TextDecoder('utf-8', { ignoreBOM: true, fatal: true });
cachedTextDecoder.decode();
const MAX_SAFARI_DECODE_BYTES = 2146435072;
let numBytesDecoded = 0;
function decodeText(ptr, len) {
    numBytesDecoded += len;
    if (numBytesDecoded >= MAX_SAFARI_DECODE_BYTES) {
        cachedTextDecoder = new TextDecoder('utf-8', { ignoreBOM: true, fatal: true });
        cachedTextDecoder.decode();
        numBytesDecoded = len;
    }
    return cachedTextDecoder.decode(getUint8ArrayMemory0().subarray(ptr, ptr + len));
}

let wasmModule, wasmInstance, wasm;
function __wbg_finalize_init(instance, module) {
    wasmInstance = instance;
    wasm = instance.exports;
    wasmModule = module;
    cachedFloat64ArrayMemory0 = null;
    cachedUint8ArrayMemory0 = null;
    wasm.__wbindgen_start();
    return wasm;
}

async function __wbg_load(module, imports) {
    if (typeof Response === 'function' && module instanceof Response) {
        if (!module.ok) {
            throw new Error(`failed to fetch Wasm: ${module.status} ${module.statusText} fetching '${module.url}'`);
        }

        if (typeof WebAssembly.instantiateStreaming === 'function') {
            try {
                return await WebAssembly.instantiateStreaming(module, imports);
            } catch (e) {
                const validResponse = expectedResponseType(module.type);

                if (validResponse && module.headers.get('Content-Type') !== 'application/wasm') {
                    console.warn("`WebAssembly.instantiateStreaming` failed because your server does not serve Wasm with `application/wasm` MIME type. Falling back to `WebAssembly.instantiate` which is slower. Original error:\n", e);

                } else { throw e; }
            }
        }

        const bytes = await module.arrayBuffer();
        return await WebAssembly.instantiate(bytes, imports);
    } else {
        const instance = await WebAssembly.instantiate(module, imports);

        if (instance instanceof WebAssembly.Instance) {
            return { instance, module };
        } else {
            return instance;
        }
    }

    function expectedResponseType(type) {
        switch (type) {
            case 'basic': case 'cors': case 'default': return true;
        }
        return false;
    }
}

function initSync(module) {
    if (wasm !== undefined) return wasm;


    if (module !== undefined) {
        if (Object.getPrototypeOf(module) === Object.prototype) {
            ({module} = module)
        } else {
            console.warn('using deprecated parameters for `initSync()`; pass a single object instead')
        }
    }

    const imports = __wbg_get_imports();
    if (!(module instanceof WebAssembly.Module)) {
        module = new WebAssembly.Module(module);
    }
    const instance = new WebAssembly.Instance(module, imports);
    return __wbg_finalize_init(instance, module);
}

async function __wbg_init(module_or_path) {
    if (wasm !== undefined) return wasm;


    if (module_or_path !== undefined) {
        if (Object.getPrototypeOf(module_or_path) === Object.prototype) {
            ({module_or_path} = module_or_path)
        } else {
            console.warn('using deprecated parameters for the initialization function; pass a single object instead')
        }
    }

    if (module_or_path === undefined) {
        module_or_path = new URL('bekkshrink_wasm_bg.wasm', import.meta.url);
    }
    const imports = __wbg_get_imports();

    if (typeof module_or_path === 'string' || (typeof Request === 'function' && module_or_path instanceof Request) || (typeof URL === 'function' && module_or_path instanceof URL)) {
        module_or_path = fetch(module_or_path);
    }

    const { instance, module } = await __wbg_load(await module_or_path, imports);

    return __wbg_finalize_init(instance, module);
}

export { initSync, __wbg_init as default };
