import { readFileSync } from 'node:fs'
import { fileURLToPath } from 'node:url'
import { dirname, join } from 'node:path'

const fixturesDir = join(dirname(fileURLToPath(import.meta.url)), '..', 'fixtures')

export type Recorded<T> = { status: number; body: T }

export function fixture<T>(name: string): Recorded<T> {
  return JSON.parse(readFileSync(join(fixturesDir, `${name}.json`), 'utf-8')) as Recorded<T>
}
